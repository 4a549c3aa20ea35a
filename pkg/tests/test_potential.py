import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opo_wigner import OpoParams, QuarticConvention, log_w_unnorm, s_factor
from opo_wigner.oracles import importance_sample
from opo_wigner.potential import (DOCUMENTED_POINT, CurlError, abcd, axis_path_integral,
                                  curl_matrix, curl_report, determinant_identity, diffusion,
                                  diffusion_inverse, line_integral, max_curl,
                                  mean_diffusion_scale, potential_from_z, z_approx,
                                  z_approx_field, z_exact, z_exact_field)
from opo_wigner.sde import drift_two_mode, noise_matrix

coord = st.floats(-10, 10, allow_nan=False)
points = st.tuples(coord, coord, coord, coord)
couplings = st.floats(0.0, 0.1)


class TestDiffusion:
    def test_abcd_examples(self):
        assert abcd((0, 0, 0, 0), OpoParams(0.5, 0.01)) == (1.0, 1.0, 0.0, 0.0)
        a, b, c, d = abcd((1, 0, 0, 1), OpoParams(0.5, 0.01))
        assert (a, b, c) == (pytest.approx(1.005), pytest.approx(1.005), 0.0)
        assert d == pytest.approx(0.005)
        lhs, rhs = determinant_identity((1, 0, 0, 1), OpoParams(0.5, 0.01))
        assert lhs == pytest.approx(1.01, abs=1e-15) and rhs == pytest.approx(1.01, abs=1e-15)

    @given(points, couplings)
    def test_determinant_identity(self, X, g2):
        lhs, rhs = determinant_identity(X, OpoParams(0.5, g2))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_origin(self):
        np.testing.assert_array_equal(diffusion((0, 0, 0, 0), OpoParams(0.5, 0.01, 2.0)).matrix,
                                      4.0 * np.eye(4))

    def test_matches_noise_matrix(self, rng):
        for _ in range(100):
            p = OpoParams(rng.uniform(0, 2), rng.uniform(0, 0.1), rng.uniform(0.5, 2))
            X = rng.uniform(-10, 10, size=4)
            B = noise_matrix(X, p)
            D = diffusion(X, p).matrix
            np.testing.assert_allclose(B @ B.T, D, rtol=1e-12, atol=1e-12 * np.abs(D).max())

    def test_inverse(self, rng):
        for _ in range(100):
            p = OpoParams(0.5, rng.uniform(0, 0.1), rng.uniform(0.5, 2))
            X = rng.uniform(-10, 10, size=4)
            prod = diffusion(X, p).matrix @ diffusion_inverse(X, p)
            np.testing.assert_allclose(prod, np.eye(4), atol=1e-12)

    @given(points, couplings)
    def test_symmetric_psd(self, X, g2):
        D = diffusion(X, OpoParams(0.5, g2)).matrix
        np.testing.assert_array_equal(D, D.T)
        assert np.linalg.eigvalsh(D).min() > -1e-9


class TestFields:
    def test_origin(self):
        p = OpoParams(0.7, 0.01)
        np.testing.assert_array_equal(z_exact((0, 0, 0, 0), p), 0.0)
        np.testing.assert_array_equal(z_approx((0, 0, 0, 0), p), 0.0)

    def test_linear_limit(self):
        # potential-gradient orientation: Z1 = -(-x1 + mu x2) at g2 = 0
        p = OpoParams(0.5, 0.0)
        X = np.array([0.3, -1.2, 2.0, 0.4])
        assert z_exact(X, p)[0] == pytest.approx(-(-X[0] + 0.5 * X[2]))
        np.testing.assert_allclose(z_exact(X, p, "derived"), z_approx(X, p))

    def test_printed_y_sign(self):
        # the printed bracket keeps +mu in the y rows; the drift has -mu there
        p = OpoParams(0.5, 0.0)
        X = np.array([0.0, 1.0, 0.0, 2.0])
        assert z_exact(X, p)[1] == pytest.approx(-(-1.0 + 0.5 * 2.0))
        assert z_exact(X, p, "derived")[1] == pytest.approx(-(-1.0 - 0.5 * 2.0))

    def test_exact_variants_agree_at_small_coupling(self):
        # printed and swapped differ only at O(g2); both share x rows with the drift
        X = np.array([0.3, -0.2, 0.5, 0.1])
        p = OpoParams(0.5, 1e-6)
        ref = z_exact(X, p, "derived")
        for variant in ("printed", "swapped"):
            z = z_exact(X, p, variant)
            np.testing.assert_allclose(z[[0, 2]], ref[[0, 2]], atol=1e-5)

    def test_derived_is_drift_based(self, rng):
        # derived field solves D Z = -(2A - div D) with div D_i = sum_j dD_ij/dx_j
        p = OpoParams(0.8, 0.03, gamma=1.7)
        for _ in range(20):
            X = rng.uniform(-3, 3, size=4)
            h = 1e-6
            div = np.zeros(4)
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                div += (diffusion(X + e, p).matrix[:, j] - diffusion(X - e, p).matrix[:, j]) / (2 * h)
            rhs = -(2 * drift_two_mode(X, p) - div)
            np.testing.assert_allclose(diffusion(X, p).matrix @ z_exact(X, p, "derived"), rhs,
                                       rtol=1e-7, atol=1e-7)

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            z_exact((1, 0, 0, 0), OpoParams(0.5, 0.01), "other")

    def test_approx_is_minus_grad_log_w(self, rng):
        for _ in range(100):
            p = OpoParams(rng.uniform(0, 2), rng.uniform(0, 0.05))
            X = rng.uniform(-8, 8, size=4)
            h = 1e-5
            grad = np.array([(log_w_unnorm(X + h * e, p) - log_w_unnorm(X - h * e, p)) / (2 * h)
                             for e in np.eye(4)])
            np.testing.assert_allclose(z_approx(X, p), -grad, rtol=1e-8, atol=1e-8)


class TestCurl:
    def test_linear_symmetric_field(self):
        S = np.array([[2.0, 1, 0, 3], [1, 1, 0, 0], [0, 0, 5, 1], [3, 0, 1, 2]])
        assert max_curl(lambda X: S @ X, np.ones(4)) < 1e-9

    def test_antisymmetric_field_detected(self):
        A = np.zeros((4, 4))
        A[0, 1], A[1, 0] = 1.0, -1.0
        C = curl_matrix(lambda X: A @ X, np.zeros(4))
        assert np.max(np.abs(C)) == pytest.approx(2.0)
        np.testing.assert_allclose(C, -C.T)

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            curl_matrix(lambda X: X, np.zeros(4), h=0.0)

    def test_approx_curl_free(self, rng):
        for _ in range(100):
            p = OpoParams(rng.uniform(0, 2), 0.01)
            X = rng.uniform(-5, 5, size=4)
            assert max_curl(z_approx_field(p), X) < 1e-8

    def test_approx_cross_partials(self):
        # dZ1/dx2 = dZ3/dx1 = -(mu - g2 x1 x2)/s in potential orientation
        p = OpoParams(1.3, 0.02)
        X = np.array([0.7, -0.4, 1.1, 0.9])
        h = 1e-6
        e1, e3 = np.eye(4)[0], np.eye(4)[2]
        d12 = (z_approx(X + h * e3, p)[0] - z_approx(X - h * e3, p)[0]) / (2 * h)
        d31 = (z_approx(X + h * e1, p)[2] - z_approx(X - h * e1, p)[2]) / (2 * h)
        expected = -(1.3 - 0.02 * X[0] * X[2]) / s_factor(1.3)
        assert d12 == pytest.approx(expected, rel=1e-7)
        assert d31 == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("variant", ["printed", "swapped", "derived"])
    def test_exact_not_curl_free(self, variant):
        p = OpoParams(0.5, 0.01)
        assert max_curl(z_exact_field(p, variant), DOCUMENTED_POINT) > 1e-6

    def test_exact_curl_free_without_coupling(self):
        p = OpoParams(0.5, 0.0)
        assert max_curl(z_exact_field(p), DOCUMENTED_POINT) < 1e-8

    def test_report(self):
        rows = curl_report(OpoParams(0.5, 0.01), [DOCUMENTED_POINT, (0, 0, 0, 0)])
        assert [r.tag for r in rows] == ["approx", "exact:printed"] * 2
        assert rows[0].max_curl < 1e-8 < 1e-6 < rows[1].max_curl


class TestPotential:
    def test_origin(self):
        assert potential_from_z(z_approx_field(OpoParams(0.5, 0.01)), np.zeros(4)) == 0.0

    def test_vacuum_gaussian(self):
        v = potential_from_z(z_approx_field(OpoParams(0.0, 0.0)), (1, 0, 0, 0))
        assert v == pytest.approx(0.5, rel=1e-12)

    def test_above_threshold_point(self):
        v = potential_from_z(z_approx_field(OpoParams(1.5, 0.01)), (10, 0, 10, 0))
        assert v == pytest.approx(-50 / 3, rel=1e-10)

    def test_reproduces_log_density(self, rng):
        for _ in range(20):
            p = OpoParams(rng.uniform(0, 2), 0.01)
            X = rng.uniform(-6, 6, size=4)
            v = potential_from_z(z_approx_field(p), X)
            assert v == pytest.approx(-log_w_unnorm(X, p, QuarticConvention.APPENDIX_B),
                                      rel=1e-8, abs=1e-8)

    def test_path_independent_approx(self, rng):
        p = OpoParams(1.2, 0.01)
        for X in rng.uniform(-6, 6, size=(10, 4)):
            f = z_approx_field(p)
            assert abs(line_integral(f, X) - axis_path_integral(f, X)) < 1e-8

    def test_path_dependent_exact(self):
        p = OpoParams(0.5, 0.01)
        f = z_exact_field(p)
        gap = abs(line_integral(f, DOCUMENTED_POINT) - axis_path_integral(f, DOCUMENTED_POINT))
        assert gap > 1e-6

    def test_exact_rejected(self):
        with pytest.raises(CurlError):
            potential_from_z(z_exact_field(OpoParams(0.5, 0.01)), DOCUMENTED_POINT)


class TestMeanDiffusion:
    @pytest.mark.parametrize("mu", [0.3, 1.0, 1.5, 2.5])
    def test_scale_equals_s(self, mu):
        assert mean_diffusion_scale(OpoParams(mu, 0.01)) == pytest.approx(s_factor(mu), rel=1e-14)

    @pytest.mark.parametrize("mu", [0.5, 1.5])
    def test_offdiagonal_means_vanish(self, mu):
        # c ~ x1 x2 + y1 y2 and d ~ x1 y2 - y1 x2 average to zero under W
        p = OpoParams(mu, 0.01)
        mc = importance_sample(p, monos=["x1 x2", "y1 y2", "x1 y2", "y1 x2"], n=1_000_000,
                               seed=5)
        v, se = mc.values, mc.stderr
        c = v["x1 x2"] + v["y1 y2"]
        d = v["x1 y2"] - v["y1 x2"]
        assert abs(c) < 3 * (se["x1 x2"] + se["y1 y2"])
        assert abs(d) < 3 * (se["x1 y2"] + se["y1 x2"])
