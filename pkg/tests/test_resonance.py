import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bplab.resonance import (
    BoundCheckReport,
    FreqPair,
    Region,
    certify_bound,
    certify_bound_constant_range,
    classify_region,
    evaluate_bound,
    grad_phase,
    grad_phase_magnitudes,
    null_form,
    null_form_derivs,
    phase,
    resonance_probe,
    second_derivs,
)
from bplab.spectral import InputError

coords = st.floats(-10.0, 10.0, allow_nan=False)


@st.composite
def valid_pairs(draw):
    xi = np.array([draw(coords), draw(coords)])
    eta = np.array([draw(coords), draw(coords)])
    assume(np.linalg.norm(xi) > 1e-3)
    assume(np.linalg.norm(eta) > 1e-3)
    assume(np.linalg.norm(xi - eta) > 1e-3)
    return FreqPair(tuple(xi), tuple(eta))


class TestFreqPair:
    @pytest.mark.parametrize("xi,eta", [((0.0, 0.0), (1.0, 0.0)),
                                        ((1.0, 0.0), (0.0, 0.0)),
                                        ((1.0, 2.0), (1.0, 2.0))])
    def test_singular_inputs_rejected(self, xi, eta):
        with pytest.raises(InputError):
            FreqPair(xi, eta)

    def test_valid(self):
        p = FreqPair((1.0, 0.0), (0.0, 1.0))
        assert p.xi == (1.0, 0.0)


class TestPhase:
    def test_spacetime_resonance_zero(self):
        assert phase(FreqPair((0.0, 2.0), (0.0, 1.0))) == 0.0

    def test_hand_value(self):
        assert phase(FreqPair((1.0, 0.0), (2.0, 0.0))) == pytest.approx(1.5)

    @settings(max_examples=100, deadline=None)
    @given(p=valid_pairs())
    def test_symmetry_under_swap(self, p):
        xi = np.asarray(p.xi)
        eta = np.asarray(p.eta)
        q = FreqPair(tuple(xi), tuple(xi - eta))
        scale = max(abs(phase(p)), 1.0 / min(np.linalg.norm(eta),
                                             np.linalg.norm(xi - eta)) ** 2)
        assert abs(phase(p) - phase(q)) < 1e-13 * scale


class TestNullForm:
    def test_parallel_zero(self):
        m, _ = null_form(FreqPair((2.0, 0.0), (1.0, 0.0)))
        assert m == 0.0

    def test_perp_convention(self):
        m, _ = null_form(FreqPair((0.0, 1.0), (1.0, 0.0)))
        assert m == 1.0

    @settings(max_examples=100, deadline=None)
    @given(p=valid_pairs())
    def test_mbar_is_swapped_m(self, p):
        xi = np.asarray(p.xi)
        eta = np.asarray(p.eta)
        _, mbar = null_form(p)
        m_swap, _ = null_form(FreqPair(tuple(xi), tuple(xi - eta)))
        assert mbar == m_swap

    @settings(max_examples=100, deadline=None)
    @given(p=valid_pairs())
    def test_pointwise_bound(self, p):
        # |m| <= min(|xi|, |xi - 2 eta|)/|eta| via xi.eta_perp = (xi-2eta).eta_perp
        xi = np.asarray(p.xi)
        eta = np.asarray(p.eta)
        m, _ = null_form(p)
        bound = min(np.linalg.norm(xi), np.linalg.norm(xi - 2 * eta)) / np.linalg.norm(eta)
        assert abs(m) <= bound * (1 + 1e-12)


class TestGradPhase:
    def test_space_resonance(self):
        for eta in ((0.3, -1.2), (2.0, 0.0)):
            p = FreqPair((2 * eta[0], 2 * eta[1]), eta)
            _, ge = grad_phase(p)
            assert np.linalg.norm(ge) == 0.0

    @settings(max_examples=150, deadline=None)
    @given(p=valid_pairs())
    def test_magnitude_identities(self, p):
        gx, ge = grad_phase(p)
        ix, ie = grad_phase_magnitudes(p)
        assert np.linalg.norm(gx) == pytest.approx(ix, rel=1e-12, abs=1e-300)
        assert np.linalg.norm(ge) == pytest.approx(ie, rel=1e-12, abs=1e-300)

    def test_finite_differences(self):
        from bplab.resonance import _phase_arr
        xi = np.array([0.7, -0.3])
        eta = np.array([1.2, 0.5])
        gx, ge = grad_phase(FreqPair(tuple(xi), tuple(eta)))
        h = 1e-6
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            assert gx[a] == pytest.approx(
                (_phase_arr(xi + e, eta) - _phase_arr(xi - e, eta)) / (2 * h), rel=1e-6)
            assert ge[a] == pytest.approx(
                (_phase_arr(xi, eta + e) - _phase_arr(xi, eta - e)) / (2 * h), rel=1e-6)


class TestSecondDerivs:
    @settings(max_examples=100, deadline=None)
    @given(p=valid_pairs())
    def test_harmonicity_and_mixed_antisymmetry(self, p):
        sd = second_derivs(p)
        scale = max(np.abs(sd["eta_eta"]).max(), 1e-300)
        assert abs(np.trace(sd["eta_eta"])) < 1e-12 * scale
        assert abs(np.trace(sd["xi_xi"])) < 1e-12 * max(np.abs(sd["xi_xi"]).max(), 1e-300)
        mixed = sd["xi_eta"]
        assert abs(mixed[0, 0] + mixed[1, 1]) < 1e-12 * max(np.abs(mixed).max(), 1e-300)

    def test_finite_differences(self):
        from bplab.resonance import _grad_eta_arr
        xi = np.array([3.0, 0.5])
        eta = np.array([1.0, -0.4])
        sd = second_derivs(FreqPair(tuple(xi), tuple(eta)))
        h = 1e-5
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd_ee = (_grad_eta_arr(xi, eta + e) - _grad_eta_arr(xi, eta - e)) / (2 * h)
            fd_xe = (_grad_eta_arr(xi + e, eta) - _grad_eta_arr(xi - e, eta)) / (2 * h)
            assert np.allclose(sd["eta_eta"][a], fd_ee, rtol=1e-5, atol=1e-8)
            assert np.allclose(sd["xi_eta"][a], fd_xe, rtol=1e-5, atol=1e-8)


class TestNullFormDerivs:
    def test_grad_xi_independent_of_xi(self):
        eta = (0.4, -1.1)
        d1 = null_form_derivs(FreqPair((1.0, 0.0), eta))
        d2 = null_form_derivs(FreqPair((-2.0, 3.0), eta))
        assert np.array_equal(d1["grad_xi_m"], d2["grad_xi_m"])

    def test_convention_example(self):
        d = null_form_derivs(FreqPair((1.0, 0.0), (0.0, 1.0)))
        assert tuple(d["grad_xi_m"]) == (-1.0, 0.0)

    def test_finite_differences(self):
        from bplab.resonance import _null_form_arr
        xi = np.array([0.9, 1.4])
        eta = np.array([-0.6, 0.8])
        d = null_form_derivs(FreqPair(tuple(xi), tuple(eta)))
        h = 1e-6
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            fd = (_null_form_arr(xi, eta + e) - _null_form_arr(xi, eta - e)) / (2 * h)
            assert d["grad_eta_m"][a] == pytest.approx(fd, rel=1e-6, abs=1e-9)
            fd_mbar = (_null_form_arr(xi + e, xi + e - eta)
                       - _null_form_arr(xi - e, xi - e - eta)) / (2 * h)
            assert d["grad_xi_mbar"][a] == pytest.approx(fd_mbar, rel=1e-5, abs=1e-8)


class TestClassifyRegion:
    def test_spacetime_resonance_is_case2a(self):
        # eta1 = 0 makes the strict subcase-B test false, so the >= branch wins
        label = classify_region(FreqPair((0.0, 2.0), (0.0, 1.0)))
        assert label.region == Region.R1_CASE2A

    def test_r2(self):
        assert classify_region(FreqPair((1.0, 0.0), (200.0, 0.0))).region == Region.R2

    def test_r3(self):
        assert classify_region(FreqPair((200.0, 0.0), (1.0, 0.0))).region == Region.R3

    def test_case1(self):
        label = classify_region(FreqPair((1.0, 1.0), (1.0, 0.0)))
        assert label.region == Region.R1_CASE1
        assert label.margins["case1"] > 0

    def test_swap_normalization_recorded(self):
        # |eta| > |xi - eta| triggers the change of variables
        label = classify_region(FreqPair((1.0, 1.0), (5.0, 5.0)))
        assert label.swapped

    @settings(max_examples=100, deadline=None)
    @given(p=valid_pairs())
    def test_total_and_deterministic(self, p):
        a = classify_region(p)
        b = classify_region(p)
        assert a.region == b.region
        assert a.region in Region


class TestCertifyBound:
    @pytest.mark.parametrize("iid", list("abcdef"))
    def test_zero_violations_small(self, iid):
        rep = certify_bound(iid, 10_000, seed=42)
        assert isinstance(rep, BoundCheckReport)
        assert rep.samples == 10_000
        assert rep.violations == 0
        assert rep.worst_margin >= 0.0

    def test_ratio_range_for_d(self):
        lo, hi = certify_bound_constant_range("d", 10_000, seed=7)
        assert 0.5 <= lo <= hi <= 4.0

    def test_unknown_id(self):
        with pytest.raises(KeyError):
            certify_bound("z", 10_000)

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            certify_bound("a", 100)

    def test_wrong_region_rejected(self):
        # a Case-1 pair fed to the Subcase-A inequality
        pair = FreqPair((1.0, 1.0), (1.0, 0.0))
        with pytest.raises(InputError):
            evaluate_bound("b", pair)

    def test_evaluate_in_region(self):
        margin, _ = evaluate_bound("b", FreqPair((0.0, 2.0), (0.0, 1.0)))
        assert margin >= 0.0

    def test_deterministic_per_seed(self):
        a = certify_bound("d", 10_000, seed=5)
        b = certify_bound("d", 10_000, seed=5)
        assert a == b


class TestResonanceProbe:
    def test_lambda_grid(self):
        out = resonance_probe([1.0, -3.5, 0.25])
        for row in out["spacetime"]:
            assert row["abs_phase"] < 1e-14
            assert row["grad_eta_norm"] < 1e-14
        assert out["forward_exact"]
        assert out["converse_nonzero"]

    def test_zero_lambda_rejected(self):
        with pytest.raises(ValueError):
            resonance_probe([0.0])

    def test_magnitude_positive_off_resonance(self):
        # |xi - 2 eta| = |eta| forces a nonzero eta-gradient
        eta = np.array([0.7, 0.2])
        xi = 2 * eta + np.linalg.norm(eta) * np.array([1.0, 0.0])
        _, ge = grad_phase(FreqPair(tuple(xi), tuple(eta)))
        assert np.linalg.norm(ge) > 0.0
