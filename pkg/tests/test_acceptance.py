"""End-to-end acceptance gate.

Each test runs one numbered criterion, prints its one-line verdict, and fails
if the verdict is FAIL. The slow simulation-backed criteria dominate the
suite's wall time; run this file alone with `pytest tests/test_acceptance.py -s`
to watch the verdict lines as they complete.
"""

from bplab import acceptance

SEED = 0


def _check(result):
    print()
    print(result.summary_line())
    assert result.passed, result.details


def test_criterion_01_dispersive_decay_rate():
    _check(acceptance.criterion_1(SEED))


def test_criterion_02_stationary_phase_geometry():
    _check(acceptance.criterion_2(SEED))


def test_criterion_03_solver_correctness():
    _check(acceptance.criterion_3(SEED))


def test_criterion_04_energy_certificate():
    _check(acceptance.criterion_4(SEED))


def test_criterion_05_longevity_trend():
    _check(acceptance.criterion_5(SEED))


def test_criterion_06_resonance_identities():
    _check(acceptance.criterion_6(SEED))


def test_criterion_07_region_bounds_certified():
    _check(acceptance.criterion_7(SEED))


def test_criterion_08_null_form_convolution():
    _check(acceptance.criterion_8(SEED))


def test_criterion_09_scaling_covariance():
    _check(acceptance.criterion_9(SEED))


def test_criterion_10_transport_inequality():
    _check(acceptance.criterion_10(SEED))


def test_criterion_11_bootstrap_feasibility():
    _check(acceptance.criterion_11(SEED))
