import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import fsolve

from opo_wigner.params import (THRESHOLD_TOL, OpoParams, Regime, classical_fixed_points,
                               physical_params, regime, rescale_params, ring_point, s_factor)
from opo_wigner.sde import drift_two_mode

mus = st.floats(0.0, 5.0, allow_nan=False)


class TestSFactor:
    def test_examples(self):
        assert s_factor(0.5) == 1.0
        assert s_factor(1.0) == 1.0
        assert s_factor(2.0) == 2.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            s_factor(-0.1)

    def test_array_input(self):
        np.testing.assert_array_equal(s_factor(np.array([0.0, 1.0, 3.0])), [1.0, 1.0, 3.0])

    @given(mus, mus)
    def test_nondecreasing(self, a, b):
        lo, hi = sorted((a, b))
        assert s_factor(lo) <= s_factor(hi)

    @given(st.floats(0.0, 0.999999), st.floats(1.0, 5.0))
    def test_piecewise_linear(self, below, above):
        assert s_factor(below) == 1.0
        assert s_factor(above) == above

    def test_continuous_at_kink(self):
        for eps in (1e-3, 1e-6, 1e-9):
            assert abs(s_factor(1 + eps) - s_factor(1 - eps)) <= eps * (1 + 1e-6)


class TestOpoParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            OpoParams(-1.0, 0.01)
        with pytest.raises(ValueError):
            OpoParams(0.5, -0.01)
        with pytest.raises(ValueError):
            OpoParams(0.5, 0.01, gamma=0.0)
        with pytest.raises(ValueError):
            OpoParams(0.5, 0.01, gamma0=-1.0)

    def test_adiabatic_flag(self):
        assert OpoParams(0.5, 0.01, gamma0=10.0).adiabatic_ok()
        assert not OpoParams(0.5, 0.01, gamma0=5.0).adiabatic_ok()
        assert OpoParams(0.5, 0.01, gamma0=5.0).adiabatic_ok(min_ratio=4)

    def test_gamma_ratio(self):
        assert OpoParams(0.5, 0.01, gamma=2.0, gamma0=10.0).gamma_r == 5.0

    def test_regime(self):
        assert regime(0.5) is Regime.BELOW
        assert regime(1.0) is Regime.THRESHOLD
        assert regime(1.0 + 0.5 * THRESHOLD_TOL) is Regime.THRESHOLD
        assert regime(1.0 + 10 * THRESHOLD_TOL) is Regime.ABOVE
        assert regime(1.5) is Regime.ABOVE


class TestRescale:
    def test_example_threshold(self):
        chi = math.sqrt(20) * 0.1
        p = rescale_params(chi, 1.0, 10.0, 10.0 / chi)
        assert p.g2 == pytest.approx(0.01, rel=1e-14)
        assert p.mu == pytest.approx(1.0, rel=1e-14)

    def test_decoupled_limit(self):
        p = rescale_params(0.0, 1.0, 10.0, 3.0)
        assert p.g2 == 0.0 and p.mu == 0.0

    def test_doubling_pump(self):
        a = rescale_params(0.3, 1.0, 10.0, 2.0)
        b = rescale_params(0.3, 1.0, 10.0, 4.0)
        assert b.mu == pytest.approx(2 * a.mu)
        assert b.g2 == a.g2

    def test_zero_damping_rejected(self):
        with pytest.raises(ValueError):
            rescale_params(0.3, 0.0, 10.0, 1.0)
        with pytest.raises(ValueError):
            rescale_params(0.3, 1.0, 0.0, 1.0)

    @given(st.floats(1e-3, 10), st.floats(0.1, 10), st.floats(0.1, 100), st.floats(0, 100))
    def test_round_trip(self, chi, gamma, gamma0, E):
        p = rescale_params(chi, gamma, gamma0, E)
        chi2, gamma2, gamma02, E2 = physical_params(p)
        assert chi2 == pytest.approx(chi, rel=1e-12)
        assert (gamma2, gamma02) == (gamma, gamma0)
        assert E2 == pytest.approx(E, rel=1e-12, abs=1e-12)


class TestFixedPoints:
    def test_below_origin_only(self):
        fp = classical_fixed_points(OpoParams(0.5, 0.01))
        assert fp.origin_stable and fp.intensity == 0.0
        assert len(fp.points) == 1
        np.testing.assert_array_equal(fp.points[0], 0.0)

    def test_no_nonzero_root_below(self):
        # independent oracle: Newton from many starts only ever lands on the origin
        p = OpoParams(0.5, 0.01)
        starts = np.random.default_rng(3).uniform(-30, 30, size=(200, 4))
        for x0 in starts:
            sol, info, ier, _ = fsolve(lambda X: drift_two_mode(X, p), x0, full_output=True)
            if ier == 1:
                assert np.linalg.norm(sol) < 1e-6

    def test_above_representative(self):
        fp = classical_fixed_points(OpoParams(1.5, 0.01))
        assert not fp.origin_stable
        np.testing.assert_allclose(fp.representative, [10.0, 0.0, 10.0, 0.0], rtol=1e-14)
        assert fp.intensity == pytest.approx(100.0)

    def test_threshold(self):
        fp = classical_fixed_points(OpoParams(1.0, 0.01))
        assert fp.intensity == 0.0

    def test_above_needs_coupling(self):
        with pytest.raises(ValueError):
            classical_fixed_points(OpoParams(1.5, 0.0))

    @given(st.floats(0.0, 3.0), st.floats(1e-4, 0.1), st.floats(0, 2 * math.pi))
    def test_drift_vanishes_on_fixed_points(self, mu, g2, theta):
        p = OpoParams(mu, g2)
        for X in classical_fixed_points(p).points + [ring_point(p, theta)]:
            assert np.linalg.norm(drift_two_mode(np.asarray(X), p)) < 1e-10 * p.gamma * max(
                1.0, np.linalg.norm(X) ** 3 * g2)

    @given(st.floats(1.0001, 3.0), st.floats(1e-4, 0.1))
    def test_intensity_gives_s(self, mu, g2):
        p = OpoParams(mu, g2)
        fp = classical_fixed_points(p)
        assert g2 * fp.intensity / 2 == pytest.approx(mu - 1, rel=1e-12)
        assert 1 + g2 * fp.intensity / 2 == pytest.approx(s_factor(mu), rel=1e-12)
