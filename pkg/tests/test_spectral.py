import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bplab.spectral import (
    ConfigurationError,
    Grid2D,
    InputError,
    NORM_REPORT_COLUMNS,
    NormReport,
    Profile,
    RealField2D,
    SpectralField2D,
    besov_norm,
    central_mass_fraction,
    l2_norm,
    linf_norm,
    lp_bump,
    lp_phys_norm,
    lp_project,
    lp_shell_range,
    norm_reports_to_csv,
    read_field,
    require_mean_zero,
    sobolev_norm,
    transform_forward,
    transform_inverse,
    weighted_profile_norm,
    write_field,
    zero_mean,
)


def random_field(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return RealField2D(grid, scale * rng.normal(size=(grid.n, grid.n)))


def gaussian_field(grid, width=1.0):
    x = grid.x_coords()
    X, Y = np.meshgrid(x, x, indexing="ij")
    return RealField2D(grid, np.exp(-(X ** 2 + Y ** 2) / (2.0 * width ** 2)))


class TestGrid:
    def test_wavenumber_spacing(self):
        g = Grid2D(16, 10.0)
        assert g.dxi == pytest.approx(2 * np.pi / 10.0)
        k1, _ = g.wavenumbers()
        assert k1[1, 0] - k1[0, 0] == pytest.approx(g.dxi)

    @pytest.mark.parametrize("n", [7, 12, 4, 0])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ConfigurationError):
            Grid2D(n, 10.0)

    def test_rejects_nonpositive_box(self):
        with pytest.raises(ConfigurationError):
            Grid2D(16, -1.0)

    def test_x_coords_centered(self):
        g = Grid2D(8, 8.0)
        assert g.x_coords()[0] == -4.0
        assert g.x_coords()[-1] == 3.0


class TestTransforms:
    def test_zero_field(self):
        g = Grid2D(16, 5.0)
        fh = transform_forward(RealField2D(g, np.zeros((16, 16))))
        assert np.all(fh.modes == 0)

    def test_cosine_two_modes(self):
        g = Grid2D(32, 10.0)
        x = g.x_coords()
        f = RealField2D(g, np.cos(2 * np.pi * x / 10.0)[:, None] * np.ones(32))
        fh = transform_forward(f)
        nz = np.abs(fh.modes) > 1e-12
        assert nz.sum() == 2
        k1, k2 = g.wavenumbers()
        assert set(np.round(k1[nz] * 10 / (2 * np.pi)).astype(int)) == {-1, 1}
        assert np.allclose(k2[nz], 0.0)

    def test_roundtrip_random(self):
        g = Grid2D(32, 7.0)
        f = random_field(g, seed=1)
        back = transform_inverse(transform_forward(f))
        assert np.abs(back.samples - f.samples).max() < 1e-12

    def test_forward_matches_direct_summation(self):
        # O(n^4) oracle on an 8x8 grid, straight from the definition
        g = Grid2D(8, 3.0)
        f = random_field(g, seed=2)
        fh = transform_forward(f)
        x = g.x_coords()
        k = 2 * np.pi * np.fft.fftfreq(8, d=g.dx)
        expect = np.zeros((8, 8), dtype=complex)
        for a in range(8):
            for b in range(8):
                phase = np.exp(-1j * (k[a] * x[:, None] + k[b] * x[None, :]))
                expect[a, b] = np.sum(f.samples * phase) * g.dx ** 2 / (2 * np.pi) ** 2
        assert np.abs(fh.modes - expect).max() < 1e-12

    def test_parseval(self):
        g = Grid2D(64, 9.0)
        f = random_field(g, seed=3)
        fh = transform_forward(f)
        phys = np.sum(f.samples ** 2) * g.dx ** 2
        spec = (2 * np.pi) ** 2 * np.sum(np.abs(fh.modes) ** 2) * g.dxi ** 2
        assert phys == pytest.approx(spec, rel=1e-12)

    def test_require_mean_zero(self):
        g = Grid2D(16, 5.0)
        f = transform_forward(RealField2D(g, np.ones((16, 16))))
        with pytest.raises(InputError):
            require_mean_zero(f)
        require_mean_zero(zero_mean(f))


class TestLittlewoodPaley:
    def test_partition_of_unity(self):
        r = np.geomspace(1e-3, 1e3, 4001)
        total = sum(lp_bump(r / 2.0 ** j) for j in range(-14, 14))
        assert np.abs(total - 1.0).max() < 1e-12

    def test_support(self):
        r = np.array([0.49, 0.5, 2.0, 2.01])
        vals = lp_bump(r)
        assert vals[0] == 0.0 and vals[3] == 0.0

    def test_disjoint_shells_annihilate(self):
        g = Grid2D(64, 40.0)
        f = zero_mean(SpectralField2D(g, lp_bump(g.wavenumber_magnitude()).astype(complex)))
        for dj in (2, 3, -2):
            out = lp_project(f, dj)
            assert np.abs(out.modes).max() < 1e-15

    def test_reconstruction(self):
        g = Grid2D(64, 20.0)
        f = zero_mean(transform_forward(random_field(g, seed=4)))
        j_min, j_max = lp_shell_range(g)
        total = sum(lp_project(f, j).modes for j in range(j_min, j_max + 1))
        assert np.abs(total - f.modes).max() < 1e-10 * np.abs(f.modes).max()

    def test_single_mode_weight(self):
        g = Grid2D(32, 2 * np.pi)
        modes = np.zeros((32, 32), dtype=complex)
        modes[1, 0] = 1.0   # |xi| = 1 = 2^0
        f = SpectralField2D(g, modes)
        out = lp_project(f, 0)
        assert out.modes[1, 0] == pytest.approx(lp_bump(1.0))
        assert lp_bump(1.0) == pytest.approx(1.0)


class TestNorms:
    def test_sobolev_zero_and_single_mode(self):
        g = Grid2D(32, 2 * np.pi)
        assert sobolev_norm(SpectralField2D(g, np.zeros((32, 32))), 3) == 0.0
        # Hermitian pair at |xi| = 1 with unit L2 mass
        modes = np.zeros((32, 32), dtype=complex)
        modes[1, 0] = 1.0
        modes[-1, 0] = 1.0
        f = SpectralField2D(g, modes)
        scale = l2_norm(f)
        assert sobolev_norm(f, 1) / scale == pytest.approx(np.sqrt(2.0))

    def test_sobolev_matches_direct_sum(self):
        g = Grid2D(16, 7.0)
        f = transform_forward(random_field(g, seed=5))
        k = 3
        mag2 = g.wavenumber_magnitude() ** 2
        total = 0.0
        for idx in np.ndindex(16, 16):
            total += (1 + mag2[idx]) ** k * abs(f.modes[idx]) ** 2 * g.dxi ** 2
        assert sobolev_norm(f, k) == pytest.approx(2 * np.pi * np.sqrt(total), rel=1e-12)

    def test_sobolev_monotone_in_k(self):
        g = Grid2D(32, 6.0)
        f = transform_forward(random_field(g, seed=6))
        norms = [sobolev_norm(f, k) for k in range(4)]
        assert all(a <= b for a, b in zip(norms, norms[1:]))
        assert norms[0] == pytest.approx(l2_norm(f), rel=1e-13)

    def test_linf_cosine(self):
        g = Grid2D(32, 10.0)
        x = g.x_coords()
        f = transform_forward(RealField2D(g, np.cos(2 * np.pi * x / 10.0)[:, None]
                                          * np.ones(32)))
        assert linf_norm(f) == pytest.approx(1.0, rel=1e-12)

    def test_linf_matches_scan(self):
        g = Grid2D(16, 4.0)
        f = random_field(g, seed=7)
        assert linf_norm(transform_forward(f)) == pytest.approx(
            np.abs(f.samples).max(), rel=1e-12)

    def test_besov_zero(self):
        g = Grid2D(32, 10.0)
        assert besov_norm(SpectralField2D(g, np.zeros((32, 32))), 3, 1, 1) == 0.0

    def test_besov_single_shell(self):
        # shell-at-j=0 data: only the neighboring bump weights contribute
        g = Grid2D(128, 80.0)
        f = zero_mean(SpectralField2D(g, lp_bump(g.wavenumber_magnitude()).astype(complex)))
        got = besov_norm(f, 3.0, 1.0, 1.0)
        j_min, j_max = lp_shell_range(g)
        expect = sum(2.0 ** (3 * j) * lp_phys_norm(lp_project(f, j), 1.0)
                     for j in range(j_min, j_max + 1))
        assert got == pytest.approx(expect, rel=1e-12)
        # mass confined to shells j in {-1, 0, 1}
        for j in (j_min, j_max):
            assert lp_phys_norm(lp_project(f, j), 1.0) == 0.0


class TestWeightedNorms:
    def test_zero_profile(self):
        g = Grid2D(32, 10.0)
        p = Profile(SpectralField2D(g, np.zeros((32, 32))), 0.0)
        assert weighted_profile_norm(p, 2) == 0.0

    @pytest.mark.parametrize("l,expect", [(2, np.sqrt(6 * np.pi)),
                                          (3, np.sqrt(24 * np.pi))])
    def test_gaussian_closed_form(self, l, expect):
        # For f = exp(-|x|^2/2): fhat = exp(-|xi|^2/2)/(2 pi), so the norm is
        # 2 pi (int |xi|^(2l) |xi|^2 e^(-|xi|^2) dxi / (2 pi)^2)^(1/2)
        # = (pi Gamma(l+2))^(1/2) by the radial integral.
        g = Grid2D(256, 40.0)
        p = Profile(transform_forward(gaussian_field(g)), 0.0)
        assert weighted_profile_norm(p, l) == pytest.approx(expect, rel=0.01)

    def test_invalid_order(self):
        g = Grid2D(16, 5.0)
        p = Profile(SpectralField2D(g, np.zeros((16, 16))), 0.0)
        with pytest.raises(ValueError):
            weighted_profile_norm(p, 4)

    def test_translation_modulation_growth(self):
        # translating by a multiplies fhat by exp(-i a xi1); the weighted norm
        # grows consistently with the extra |a| |xi|^l fhat term
        g = Grid2D(128, 40.0)
        x = g.x_coords()
        X, Y = np.meshgrid(x, x, indexing="ij")
        base = np.exp(-(X ** 2 + Y ** 2) / 2.0)
        a = 3.0
        shifted = np.exp(-((X - a) ** 2 + Y ** 2) / 2.0)
        n0 = weighted_profile_norm(Profile(transform_forward(RealField2D(g, base))), 2)
        n1 = weighted_profile_norm(Profile(transform_forward(RealField2D(g, shifted))), 2)
        assert n1 > n0
        assert n1 < n0 + 2.0 * a * sobolev_norm(transform_forward(RealField2D(g, base)), 2)

    def test_boundary_warning(self):
        g = Grid2D(64, 4.0)     # box too small for the unit Gaussian
        p = Profile(transform_forward(gaussian_field(g, width=2.0)), 0.0)
        assert central_mass_fraction(p.field) < 0.99
        warns = []
        weighted_profile_norm(p, 2, warns)
        assert warns


@settings(max_examples=25, deadline=None)
@given(c=st.floats(min_value=-50, max_value=50, allow_nan=False).filter(lambda v: v != 0),
       seed=st.integers(0, 2 ** 16))
def test_norm_homogeneity(c, seed):
    g = Grid2D(16, 6.0)
    f = transform_forward(random_field(g, seed=seed))
    scaled = SpectralField2D(g, c * f.modes)
    for norm in (l2_norm, lambda h: sobolev_norm(h, 2), linf_norm,
                 lambda h: besov_norm(h, 3, 1, 1)):
        assert norm(scaled) == pytest.approx(abs(c) * norm(f), rel=1e-11, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 16))
def test_roundtrip_property(seed):
    g = Grid2D(16, 5.0)
    f = random_field(g, seed=seed)
    back = transform_inverse(transform_forward(f))
    assert np.abs(back.samples - f.samples).max() < 1e-12


class TestFieldFiles:
    def test_roundtrip(self, tmp_path):
        g = Grid2D(16, 12.5)
        f = random_field(g, seed=11)
        path = tmp_path / "field.bpf"
        write_field(path, f)
        back = read_field(path)
        assert back.grid == g
        assert np.array_equal(back.samples, f.samples)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bpf"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(InputError):
            read_field(path)


def test_norm_report_csv_format():
    rep = NormReport(t=1.0, l2=2.0, hk=3.0, linf_omega=0.1, linf_u=0.2,
                     linf_du=0.3, besov311=4.0, weighted2=5.0, weighted3=6.0,
                     fhat_sup2=7.0)
    text = norm_reports_to_csv([rep], header_lines=["seed=0"])
    lines = text.strip().splitlines()
    assert lines[0] == "# seed=0"
    assert lines[1] == ",".join(NORM_REPORT_COLUMNS)
    assert lines[2].split(",")[0] == "1"
    assert len(lines[2].split(",")) == len(NORM_REPORT_COLUMNS)
