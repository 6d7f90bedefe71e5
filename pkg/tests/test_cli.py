import os

import pytest

from bplab.cli import EXIT_CONFIG, EXIT_OK, main

CONFIG = """\
# small smoke-test run
n = 32
L = 20.0
beta = 1.0
dt = 0.05
t_end = 0.5
k_energy = 3
output_stride = 2
init = gaussian
eps = 0.5
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG)
    return str(path)


def read_noncomment(path):
    with open(path) as fh:
        return [line for line in fh if not line.startswith("#")]


class TestSimulate:
    def test_round_trip_with_diagnose(self, tmp_path, config_file):
        out = str(tmp_path / "run.csv")
        chk = str(tmp_path / "chk")
        rc = main(["simulate", "--config", config_file, "--out", out,
                   "--checkpoints", chk, "--seed", "1"])
        assert rc == EXIT_OK
        lines = read_noncomment(out)
        assert lines[0].strip().split(",")[:2] == ["t", "l2"]
        assert len(lines) > 2
        assert any(name.startswith("chk_") for name in os.listdir(chk))

        diag = str(tmp_path / "diag.csv")
        rc = main(["diagnose", "--in", out, "--checkpoints", chk,
                   "--out", diag, "--k", "3"])
        assert rc == EXIT_OK
        rows = read_noncomment(diag)
        assert rows[0].startswith("t,hk,energy_envelope")

    def test_deterministic_output(self, tmp_path, config_file):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = str(tmp_path / name)
            assert main(["simulate", "--config", config_file, "--out", out,
                         "--seed", "7"]) == EXIT_OK
            with open(out) as fh:
                outs.append([l for l in fh if not l.startswith("# ")
                             or "date" not in l])
        assert read_noncomment(str(tmp_path / "a.csv")) == \
            read_noncomment(str(tmp_path / "b.csv"))

    def test_no_temp_files_left(self, tmp_path, config_file):
        out = str(tmp_path / "run.csv")
        assert main(["simulate", "--config", config_file, "--out", out]) == EXIT_OK
        leftovers = [n for n in os.listdir(tmp_path) if n not in ("run.csv", "run.cfg")
                     and not n.endswith(".dump.bpf")]
        assert leftovers == []

    def test_bad_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("n = 32\nL = twenty\n")
        rc = main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x.csv")])
        assert rc == EXIT_CONFIG

    def test_missing_config_exit_code(self, tmp_path):
        rc = main(["simulate", "--config", str(tmp_path / "nope.cfg"),
                   "--out", str(tmp_path / "x.csv")])
        assert rc == EXIT_CONFIG


class TestStphase:
    def test_prints_roots(self, capsys, tmp_path):
        out = str(tmp_path / "st.csv")
        assert main(["stphase", "--x-over-t=-1,0", "--out", out]) == EXIT_OK
        text = capsys.readouterr().out
        assert "2 stationary point(s)" in text
        assert len(read_noncomment(out)) == 3  # header plus two roots

    def test_vector_parse_error(self, tmp_path):
        assert main(["stphase", "--x-over-t", "1"]) == EXIT_CONFIG


class TestDecay:
    def test_small_run(self, tmp_path):
        out = str(tmp_path / "decay.csv")
        rc = main(["decay", "--n", "64", "--L", "50", "--t-min", "5",
                   "--t-max", "20", "--n-times", "4", "--out", out])
        assert rc == EXIT_OK
        rows = read_noncomment(out)
        assert rows[0].strip() == "t,sup_norm,besov311,t_times_sup,bound_lemma52"
        assert len(rows) == 5


class TestResonance:
    def test_classify(self, capsys):
        assert main(["resonance", "classify", "--xi", "1,1", "--eta", "1,0"]) == EXIT_OK
        assert "region = " in capsys.readouterr().out

    def test_verify_single_id(self, tmp_path, capsys):
        out = str(tmp_path / "res.csv")
        rc = main(["resonance", "verify", "--id", "d", "--n", "10000",
                   "--out", out, "--seed", "3"])
        assert rc == EXIT_OK
        assert "0 violations" in capsys.readouterr().out
        assert len(read_noncomment(out)) == 2


class TestBootstrap:
    def test_search(self, capsys):
        assert main(["bootstrap", "--search", "--M", "1.0"]) == EXIT_OK
        assert "feasible" in capsys.readouterr().out

    def test_explicit_point(self, capsys):
        rc = main(["bootstrap", "--k", "24", "--eps", "1e-160", "--mu", "0.03"])
        assert rc == EXIT_OK
        assert "all conditions satisfied" in capsys.readouterr().out


class TestReproduceAll:
    def test_only_fast_criterion(self, capsys, tmp_path):
        out = str(tmp_path / "rep.csv")
        rc = main(["reproduce-all", "--only", "11", "--out", out])
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        assert "criterion 11 [PASS]" in text
        assert len(read_noncomment(out)) == 2
