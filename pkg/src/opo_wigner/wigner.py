"""Steady-state quasi-potential Wigner distribution of signal and idler.

The unnormalized log-density is

    -1/(2 s) [r1^2 + r2^2 + 2 mu (y1 y2 - x1 x2) + kappa r1^2 r2^2]

with r_i^2 = x_i^2 + y_i^2 and s = s_factor(mu).  Since
y1 y2 - x1 x2 = -r1 r2 cos(theta1 + theta2), every integral over phase
space collapses to a two-dimensional radial integral with a modified
Bessel function of the phase-sum angle.  That reduction is implemented in
:func:`radial_integrals` and reused by :mod:`opo_wigner.moments`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .params import OpoParams, Regime, s_factor

DEFAULT_RTOL = 1e-8
_TAIL_LOG = 40.0  # integrand below exp(-40) of the peak is dropped
_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(12)


class NonNormalizableError(ValueError):
    """Raised when the density has no finite integral (mu >= 1 with g2 = 0)."""


class QuadratureError(RuntimeError):
    pass


class QuarticConvention(enum.Enum):
    """Coefficient of the r1^2 r2^2 term in the exponent bracket.

    APPENDIX_B uses g2/2, which is what line-integrating the mean-diffusion
    potential field gives; AS_PRINTED uses g2 as written in the closed form.
    """

    APPENDIX_B = "appendixB"
    AS_PRINTED = "asPrinted"

    def kappa(self, g2: float) -> float:
        return 0.5 * g2 if self is QuarticConvention.APPENDIX_B else g2

    @classmethod
    def parse(cls, value) -> "QuarticConvention":
        if isinstance(value, cls):
            return value
        for c in cls:
            if c.value.lower() == str(value).lower():
                return c
        raise ValueError(f"unknown convention {value!r}")


class PhasePoint(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float


def log_w_unnorm(p, params: OpoParams,
                 conv: QuarticConvention = QuarticConvention.APPENDIX_B):
    """Unnormalized log-density at ``p`` (last axis holds x1, y1, x2, y2)."""
    X = np.asarray(p, dtype=float)
    x1, y1, x2, y2 = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    r1 = x1 * x1 + y1 * y1
    r2 = x2 * x2 + y2 * y2
    kappa = conv.kappa(params.g2)
    # kappa * (r1 * r2) keeps the value bit-symmetric under mode exchange
    bracket = r1 + r2 + 2.0 * params.mu * (y1 * y2 - x1 * x2) + kappa * (r1 * r2)
    out = -bracket / (2.0 * s_factor(params.mu))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# radial / Bessel reduction


def _peak_log(mu: float, kappa: float, s: float) -> float:
    """Maximum of the angular-averaged exponent; attained on r1 = r2."""
    if mu <= 1.0:
        return 0.0
    return (mu - 1.0) ** 2 / (2.0 * s * kappa)


def _log_radial(r1, r2, mu, kappa, s, p, q, n=0):
    z = mu * r1 * r2 / s
    with np.errstate(divide="ignore"):
        lb = np.log(special.ive(n, z)) + z
        return ((1 + p) * np.log(r1) + (1 + q) * np.log(r2) + lb
                - (r1 * r1 + r2 * r2 + kappa * r1 * r1 * r2 * r2) / (2.0 * s))


def integration_radius(mu: float, kappa: float, s: float, max_power: int = 8) -> float:
    """Radius beyond which the radial integrand is below exp(-40) of its peak."""
    if kappa == 0 and mu >= 1.0:
        raise NonNormalizableError("density is not normalizable for mu >= 1 with g2 = 0")
    ref = _peak_log(mu, kappa, s)
    R = 6.0 * math.sqrt(s)
    t = np.linspace(0.0, 1.0, 401)[1:]
    for _ in range(200):
        edge = _log_radial(R, R * t, mu, kappa, s, max_power, max_power)
        if edge.max() < ref - _TAIL_LOG:
            return R
        R *= 1.25
    raise QuadratureError("could not bound the integration domain")


@dataclass(frozen=True)
class RadialSpec:
    """Radial term r1^p r2^q with Bessel order n of the phase-sum angle."""

    p: int
    q: int
    n: int = 0


def radial_integrals(params: OpoParams, conv: QuarticConvention, specs,
                     rtol: float = DEFAULT_RTOL) -> tuple[np.ndarray, np.ndarray, float]:
    """Integrate ``4 pi^2 r1^(1+p) r2^(1+q) I_n(mu r1 r2 / s) exp(-(r1^2+r2^2+kappa r1^2 r2^2)/(2s))``.

    Returns ``(values, abs_errors, log_shift)``; the true integrals are
    ``values * exp(log_shift)``.  Inner integral: composite Gauss-Legendre
    (two orders, their difference is the inner error).  Outer integral:
    adaptive Gauss-Kronrod (``scipy.integrate.quad_vec``).
    """
    specs = list(specs)
    mu, s = params.mu, s_factor(params.mu)
    kappa = conv.kappa(params.g2)
    pmax = max([8] + [max(sp.p, sp.q) for sp in specs])
    R = integration_radius(mu, kappa, s, pmax)
    shift = _peak_log(mu, kappa, s)

    panels = max(16, int(math.ceil(R / 0.5)))
    edges = np.linspace(0.0, R, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])

    def rule(gl):
        x, w = gl
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    r_hi, w_hi = rule(_GL_HI)
    r_lo, w_lo = rule(_GL_LO)
    Q = np.array([sp.q for sp in specs])
    orders = np.unique([sp.n for sp in specs])

    def inner(r2, r1, w):
        z = mu * r1 * r2 / s
        base = -(r1 * r1 + r2 * r2 + kappa * r1 * r1 * r2 * r2) / (2.0 * s) + z - shift
        bess = {int(n): special.ive(n, z) for n in orders}
        ex = np.exp(base)
        out = np.empty(len(specs))
        for k, sp in enumerate(specs):
            out[k] = np.dot(w, r1 ** (1 + sp.p) * bess[sp.n] * ex)
        return out * r2 ** (1 + Q)

    def outer(r2):
        hi = inner(r2, r_hi, w_hi)
        lo = inner(r2, r_lo, w_lo)
        return np.concatenate([hi, np.abs(hi - lo)])

    # split the outer interval at the ring radius above threshold
    points = None
    if mu > 1.0 and kappa > 0:
        rp = math.sqrt((mu - 1.0) / kappa)
        if 0 < rp < R:
            points = [rp]
    res, err = integrate.quad_vec(outer, 0.0, R, epsrel=rtol * 1e-2, epsabs=0.0,
                                  norm="max", limit=2000, points=points)
    m = len(specs)
    vals = res[:m] * 4.0 * math.pi ** 2
    errs = (res[m:] + err) * 4.0 * math.pi ** 2
    return vals, errs, shift


# ---------------------------------------------------------------------------
# normalized field


@dataclass(frozen=True)
class WignerField:
    """Normalized density: W = norm * exp(log_w_unnorm)."""

    params: OpoParams
    convention: QuarticConvention
    log_norm: float
    norm_rel_error: float

    @property
    def norm(self) -> float:
        return math.exp(self.log_norm)

    @property
    def kappa(self) -> float:
        return self.convention.kappa(self.params.g2)

    @property
    def s(self) -> float:
        return s_factor(self.params.mu)

    def log_density(self, p):
        return log_w_unnorm(p, self.params, self.convention) + self.log_norm

    def density(self, p):
        return np.exp(self.log_density(p))


def normalize(params: OpoParams, conv: QuarticConvention = QuarticConvention.APPENDIX_B,
              rtol: float = DEFAULT_RTOL) -> WignerField:
    conv = QuarticConvention.parse(conv)
    if params.g2 == 0 and params.mu >= 1.0:
        raise NonNormalizableError(
            f"mu={params.mu} with g2=0: the density diverges without the quartic term")
    vals, errs, shift = radial_integrals(params, conv, [RadialSpec(0, 0, 0)], rtol)
    total, err = vals[0], errs[0]
    if not (np.isfinite(total) and total > 0):
        raise QuadratureError("normalization integral is not positive and finite")
    rel = err / total
    if rel > rtol:
        raise QuadratureError(f"normalization error {rel:.3g} exceeds rtol {rtol:.3g}")
    return WignerField(params=params, convention=conv,
                       log_norm=-(math.log(total) + shift), norm_rel_error=float(rel))


# ---------------------------------------------------------------------------
# marginal, slices, peaks


def marginal(x2, y2, field: WignerField, method: str = "numeric"):
    """Reduced density of mode 2 after integrating out mode 1.

    ``numeric`` does the mode-1 Gaussian integral of the full density
    exactly.  ``closed_form`` evaluates the printed approximate expression
    with prefactor ``2 pi N mu / (1 + g2 r^2)``, where N is the joint
    normalization; it is not renormalized.
    """
    x2 = np.asarray(x2, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    r2 = x2 * x2 + y2 * y2
    mu, s, g2 = field.params.mu, field.s, field.params.g2
    if method == "numeric":
        a = 1.0 + field.kappa * r2
        logv = (field.log_norm + math.log(2.0 * math.pi * s) - np.log(a)
                - r2 / (2.0 * s) + mu * mu * r2 / (2.0 * s * a))
        out = np.exp(logv)
    elif method == "closed_form":
        pref = 2.0 * math.pi * field.norm * mu / (1.0 + g2 * r2)
        out = pref * np.exp(-(r2 * (1.0 - mu * mu) + g2 * r2 * r2) / (2.0 * s))
    else:
        raise ValueError(f"unknown marginal method {method!r}")
    return float(out) if out.ndim == 0 else out


def marginal_exponent_peak(field: WignerField) -> float:
    """r^2 maximizing the closed-form marginal exponent, (mu^2 - 1)/(2 g2) or 0."""
    mu, g2 = field.params.mu, field.params.g2
    if mu <= 1.0:
        return 0.0
    return (mu * mu - 1.0) / (2.0 * g2)


def marginal_peak(field: WignerField, method: str = "numeric") -> float:
    """r^2 of the global maximum of the marginal density (1D bounded search)."""
    from scipy.optimize import minimize_scalar

    def neg(u):
        return -math.log(max(marginal(math.sqrt(u), 0.0, field, method), 1e-300))

    upper = max(4.0 * marginal_exponent_peak(field), 10.0 * field.s)
    res = minimize_scalar(neg, bounds=(0.0, upper), method="bounded",
                          options={"xatol": 1e-10})
    u = float(res.x)
    # the bounded search never lands exactly on an endpoint
    if neg(0.0) <= neg(u):
        return 0.0
    return u


def conditional_slice(x1, x2, field: WignerField) -> np.ndarray:
    """Joint density on the y1 = y2 = 0 plane; rows follow ``x1``, columns ``x2``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.stack([X1, np.zeros_like(X1), X2, np.zeros_like(X2)], axis=-1)
    return field.density(pts)


def peak_radius(params: OpoParams, conv: QuarticConvention) -> float:
    """x* of the slice maxima (x*, x*) above threshold; 0 otherwise."""
    if params.regime is not Regime.ABOVE:
        return 0.0
    return math.sqrt((params.mu - 1.0) / conv.kappa(params.g2))


def peak_locations(field: WignerField) -> list[tuple[float, float]]:
    """Maxima of the y1 = y2 = 0 slice as (x1, x2) pairs.

    Stationarity forces x1^2 = x2^2; the symmetric branch then needs
    1 - mu + kappa x^2 = 0, so only mu > 1 yields off-origin maxima.
    """
    x = peak_radius(field.params, field.convention)
    if x == 0.0:
        return [(0.0, 0.0)]
    return [(x, x), (-x, -x)]


def grid_maxima(values: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> list[tuple[float, float]]:
    """Strict local maxima of a 2D grid (8-neighbourhood, interior points only)."""
    v = np.asarray(values)
    core = v[1:-1, 1:-1]
    mask = np.ones_like(core, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = v[1 + di:v.shape[0] - 1 + di, 1 + dj:v.shape[1] - 1 + dj]
            mask &= core > nb
    ii, jj = np.nonzero(mask)
    return [(float(x1[i + 1]), float(x2[j + 1])) for i, j in zip(ii, jj)]
