import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import field
from opo_wigner import OpoParams, QuarticConvention, classical_fixed_points, normalize
from opo_wigner.oracles import grid_moments, importance_sample
from opo_wigner.potential import minus_grad_log_w, z_approx
from opo_wigner.wigner import (NonNormalizableError, PhasePoint, conditional_slice, grid_maxima,
                               log_w_unnorm, marginal, marginal_exponent_peak, marginal_peak,
                               peak_locations)

AB = QuarticConvention.APPENDIX_B
AP = QuarticConvention.AS_PRINTED

coord = st.floats(-20, 20, allow_nan=False)
points = st.tuples(coord, coord, coord, coord)
param_sets = st.tuples(st.floats(0, 3), st.floats(0, 0.2), st.sampled_from(list(QuarticConvention)))


class TestLogDensity:
    def test_origin(self):
        assert log_w_unnorm((0, 0, 0, 0), OpoParams(1.5, 0.01)) == 0.0

    def test_vacuum(self):
        assert log_w_unnorm((1, 0, 0, 0), OpoParams(0.0, 0.0)) == -0.5

    def test_above_threshold_point(self):
        v = log_w_unnorm(PhasePoint(10, 0, 10, 0), OpoParams(1.5, 0.01), AB)
        assert v == pytest.approx(50 / 3, rel=1e-14)

    def test_conventions_differ_by_kappa(self):
        p = OpoParams(0.7, 0.02)
        X = (1.0, 2.0, -1.0, 0.5)
        r1r2 = (1 + 4) * (1 + 0.25)
        diff = log_w_unnorm(X, p, AB) - log_w_unnorm(X, p, AP)
        assert diff == pytest.approx(0.5 * (0.02 - 0.01) * r1r2)

    def test_vectorized(self):
        X = np.random.default_rng(0).normal(size=(5, 7, 4))
        p = OpoParams(0.5, 0.01)
        out = log_w_unnorm(X, p)
        assert out.shape == (5, 7)
        assert out[2, 3] == log_w_unnorm(X[2, 3], p)

    @given(points, param_sets)
    def test_phase_rotation_parity(self, X, ps):
        mu, g2, conv = ps
        p = OpoParams(mu, g2)
        x1, y1, x2, y2 = X
        assert log_w_unnorm((x1, y1, x2, y2), p, conv) == log_w_unnorm((y1, -x1, -y2, x2), p, conv)

    @given(points, param_sets)
    def test_mode_exchange(self, X, ps):
        mu, g2, conv = ps
        p = OpoParams(mu, g2)
        x1, y1, x2, y2 = X
        assert log_w_unnorm((x1, y1, x2, y2), p, conv) == log_w_unnorm((x2, y2, x1, y1), p, conv)

    @given(points, param_sets)
    def test_joint_sign_flip(self, X, ps):
        mu, g2, conv = ps
        p = OpoParams(mu, g2)
        assert log_w_unnorm(X, p, conv) == log_w_unnorm(tuple(-v for v in X), p, conv)

    def test_gradient_matches_z_approx(self, rng):
        for _ in range(100):
            mu = rng.uniform(0, 2)
            p = OpoParams(mu, 0.01)
            X = rng.uniform(-5, 5, size=4)
            np.testing.assert_allclose(minus_grad_log_w(X, p, AB), z_approx(X, p),
                                       rtol=1e-8, atol=1e-8)


class TestNormalize:
    def test_vacuum(self):
        f = normalize(OpoParams(0.0, 0.0))
        assert f.norm == pytest.approx(1 / (4 * math.pi ** 2), rel=1e-10)

    def test_linear_gaussian(self):
        # g2 = 0 below threshold is a Gaussian with determinant (1 - mu^2)^2
        f = normalize(OpoParams(0.6, 0.0))
        assert f.norm == pytest.approx((1 - 0.36) / (4 * math.pi ** 2), rel=1e-9)

    def test_non_normalizable(self):
        with pytest.raises(NonNormalizableError):
            normalize(OpoParams(1.5, 0.0))
        with pytest.raises(NonNormalizableError):
            normalize(OpoParams(1.0, 0.0))

    def test_against_monte_carlo(self):
        p = OpoParams(0.5, 0.01)
        mc = importance_sample(p, n=2_000_000, seed=7)
        assert abs(field(0.5).norm - mc.norm) < 3 * mc.norm_se

    @pytest.mark.parametrize("mu", [0.5, 1.0, 1.5])
    @pytest.mark.parametrize("conv", ["appendixB", "asPrinted"])
    def test_unit_mass_against_grid_oracle(self, mu, conv):
        f = field(mu, 0.01, conv)
        gnorm, _ = grid_moments(f.params, conv, n=64)
        # integral of N exp(log_w) under the brute-force rule
        assert f.norm / gnorm == pytest.approx(1.0, abs=1e-6)
        assert f.norm_rel_error < 1e-8

    def test_convention_parse(self):
        assert QuarticConvention.parse("asPrinted") is AP
        assert QuarticConvention.parse(AB) is AB
        with pytest.raises(ValueError):
            QuarticConvention.parse("other")


class TestMarginal:
    def test_radial_symmetry(self):
        f = field(0.8)
        for method in ("numeric", "closed_form"):
            assert marginal(3, 4, f, method) == pytest.approx(marginal(5, 0, f, method), rel=1e-12)

    def test_below_threshold_peak_at_origin(self):
        f = field(0.8)
        assert marginal_peak(f, "numeric") == 0.0
        assert marginal_peak(f, "closed_form") == 0.0
        x = np.linspace(-6, 6, 61)
        X, Y = np.meshgrid(x, x, indexing="ij")
        assert grid_maxima(marginal(X, Y, f), x, x) == [(0.0, 0.0)]

    def test_closed_form_exponent_ring(self):
        f = field(1.2)
        assert marginal_exponent_peak(f) == pytest.approx(22.0, rel=1e-12)

    def test_closed_form_density_peak_near_ring(self):
        # the 1/(1 + g2 r^2) prefactor pulls the density maximum slightly inward
        f = field(1.2)
        r2 = marginal_peak(f, "closed_form")
        assert 21.0 < r2 < 22.0
        assert r2 == pytest.approx(21.0083, abs=1e-3)

    def test_numeric_integrates_to_one(self):
        from scipy.integrate import quad
        for mu in (0.5, 1.2):
            f = field(mu)
            tot, _ = quad(lambda r: 2 * math.pi * r * marginal(r, 0.0, f), 0, 80, limit=200)
            assert tot == pytest.approx(1.0, rel=1e-7)

    def test_numeric_matches_direct_integration(self):
        # the mode-1 Gaussian integral done by brute force at one point
        f = field(0.5)
        x = np.linspace(-10, 10, 201)
        X1, Y1 = np.meshgrid(x, x, indexing="ij")
        pts = np.stack([X1, Y1, np.full_like(X1, 1.3), np.full_like(X1, -0.4)], axis=-1)
        direct = f.density(pts).sum() * (x[1] - x[0]) ** 2
        assert marginal(1.3, -0.4, f) == pytest.approx(direct, rel=1e-10)

    @staticmethod
    def _log_shape_gap(g2):
        # the printed prefactor is not renormalized, so compare shapes
        f = field(0.5, g2)
        r = np.linspace(0, 3, 7)
        num = marginal(r, 0 * r, f)
        cf = marginal(r, 0 * r, f, "closed_form")
        return np.log(cf / cf[0]) - np.log(num / num[0]), r

    def test_methods_agree_to_order_g2_below(self):
        gap, r = self._log_shape_gap(0.01)
        assert np.all(np.abs(gap) <= 0.01 * (r ** 4 + r ** 2))
        assert np.max(np.abs(gap)) > 0

    def test_method_gap_scales_with_g2(self):
        gap1, _ = self._log_shape_gap(0.01)
        gap2, _ = self._log_shape_gap(0.005)
        ratio = gap1[1:] / gap2[1:]
        np.testing.assert_allclose(ratio, 2.0, rtol=0.02)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            marginal(0, 0, field(0.5), "other")


class TestSlices:
    def test_below_single_peak(self):
        x = np.linspace(-8, 8, 65)
        assert grid_maxima(conditional_slice(x, x, field(0.5)), x, x) == [(0.0, 0.0)]
        assert peak_locations(field(0.9)) == [(0.0, 0.0)]

    def test_above_two_peaks(self):
        x = np.linspace(-15, 15, 121)
        peaks = grid_maxima(conditional_slice(x, x, field(1.5)), x, x)
        assert sorted(peaks) == [(-10.0, -10.0), (10.0, 10.0)]

    def test_peak_locations_conventions(self):
        assert peak_locations(field(1.5)) == [(pytest.approx(10.0), pytest.approx(10.0)),
                                              (pytest.approx(-10.0), pytest.approx(-10.0))]
        x = peak_locations(field(1.5, 0.01, "asPrinted"))[0][0]
        assert x == pytest.approx(math.sqrt(50), rel=1e-14)

    @pytest.mark.parametrize("mu", [1.1, 1.5, 2.0, 3.0])
    def test_peaks_match_classical(self, mu):
        f = field(mu)
        rep = classical_fixed_points(f.params).representative
        assert abs(peak_locations(f)[0][0] - rep[0]) < 1e-10

    def test_peaks_are_stationary(self):
        f = field(1.5)
        x, _ = peak_locations(f)[0]
        g = minus_grad_log_w((x, 0.0, x, 0.0), f.params)
        assert np.max(np.abs(g)) < 1e-6

    @given(st.floats(-15, 15), st.floats(-15, 15))
    def test_joint_sign_flip(self, a, b):
        f = field(1.5)
        s = conditional_slice([a, -a], [b, -b], f)
        assert s[0, 0] == s[1, 1]

    def test_shape_and_orientation(self):
        f = field(1.5)
        s = conditional_slice([10.0, 0.0, -10.0], [10.0, 1.0], f)
        assert s.shape == (3, 2)
        assert s[0, 0] == pytest.approx(f.density((10.0, 0.0, 10.0, 0.0)))
        assert s[1, 1] == pytest.approx(f.density((0.0, 0.0, 1.0, 0.0)))
