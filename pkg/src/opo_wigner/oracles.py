"""Independent cross-checks for the radial quadrature engine.

Neither routine shares code with :mod:`opo_wigner.wigner` beyond the
unnormalized log-density itself:

* :func:`importance_sample`: self-normalized importance sampling from a
  wide Gaussian proposal; returns estimates with standard errors.
* :func:`grid_moments`: brute-force trapezoid rule on a 4D tensor grid.
  For smooth densities that decay fast inside the box this converges
  geometrically in the grid spacing, so it serves as a deterministic
  oracle at modest resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import MonomialSpec
from .params import OpoParams
from .wigner import QuarticConvention, log_w_unnorm


def proposal_scale(params: OpoParams, conv: QuarticConvention) -> float:
    """Per-coordinate standard deviation of the Gaussian proposal.

    Chosen wider than the target along every direction: the linearized
    anti-squeezed width below threshold, the quartic width near threshold
    and the ring radius above it.
    """
    mu = params.mu
    kappa = QuarticConvention.parse(conv).kappa(params.g2)
    var = 1.0 / (1.0 - min(mu, 0.9))
    if kappa > 0:
        var = max(var, 2.0 / math.sqrt(kappa) * max(mu, 1.0))
        if mu > 1:
            var = max(var, (mu - 1.0) / kappa + 2.0 * mu)
    return 1.2 * math.sqrt(var)


def grid_half_width(params: OpoParams, conv: QuarticConvention) -> float:
    """Box half-width: ring radius plus seven fluctuation widths."""
    mu = params.mu
    kappa = QuarticConvention.parse(conv).kappa(params.g2)
    ring = math.sqrt((mu - 1.0) / kappa) if mu > 1 and kappa > 0 else 0.0
    # near threshold the quartic term limits the spread to a few units
    var = 1.0 / (1.0 - mu) if mu < 0.85 else 6.0
    return ring + 7.0 * math.sqrt(var)


@dataclass(frozen=True)
class McEstimate:
    norm: float
    norm_se: float
    values: dict
    stderr: dict
    ess: float


def _mono_values(X, m: MonomialSpec):
    return X[:, 0] ** m.a * X[:, 1] ** m.b * X[:, 2] ** m.c * X[:, 3] ** m.d


def importance_sample(params: OpoParams, conv=QuarticConvention.APPENDIX_B, monos=(),
                      n: int = 2_000_000, seed: int = 12345, chunk: int = 500_000,
                      scale: float | None = None) -> McEstimate:
    """Normalization constant and moments by importance sampling.

    ``norm`` estimates the constant N with ``integral N exp(log_w) = 1``.
    Moments are self-normalized ratios; their standard errors come from
    the delta method.
    """
    conv = QuarticConvention.parse(conv)
    monos = [MonomialSpec.parse(m) if isinstance(m, str) else m for m in monos]
    sig = scale or proposal_scale(params, conv)
    rng = np.random.default_rng(seed)
    log_q0 = -2.0 * math.log(2.0 * math.pi * sig * sig)
    k = len(monos)
    # running sums of w, w^2, w f, (w f)^2, w * w f
    s_w = s_w2 = 0.0
    s_f = np.zeros(k)
    s_f2 = np.zeros(k)
    s_wf = np.zeros(k)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        X = rng.normal(scale=sig, size=(m, 4))
        log_q = log_q0 - 0.5 * np.sum(X * X, axis=1) / (sig * sig)
        w = np.exp(log_w_unnorm(X, params, conv) - log_q)
        s_w += w.sum()
        s_w2 += np.dot(w, w)
        for j, mono in enumerate(monos):
            wf = w * _mono_values(X, mono)
            s_f[j] += wf.sum()
            s_f2[j] += np.dot(wf, wf)
            s_wf[j] += np.dot(w, wf)
        done += m
    mean_w = s_w / n
    var_w = s_w2 / n - mean_w ** 2
    se_w = math.sqrt(max(var_w, 0.0) / n)
    norm = 1.0 / mean_w
    values, stderr = {}, {}
    for j, mono in enumerate(monos):
        mean_f = s_f[j] / n
        r = mean_f / mean_w
        var_f = s_f2[j] / n - mean_f ** 2
        cov = s_wf[j] / n - mean_f * mean_w
        var_r = (var_f - 2 * r * cov + r * r * var_w) / (mean_w ** 2)
        key = str(mono)
        values[key] = float(r)
        stderr[key] = math.sqrt(max(var_r, 0.0) / n)
    ess = s_w ** 2 / s_w2
    return McEstimate(norm=norm, norm_se=norm * se_w / mean_w, values=values,
                      stderr=stderr, ess=float(ess))


def grid_moments(params: OpoParams, conv=QuarticConvention.APPENDIX_B, monos=(),
                 half_width: float | None = None, n: int = 48) -> tuple[float, dict]:
    """Normalization and moments from a 4D trapezoid rule on ``[-L, L]^4``.

    Returns ``(norm, {monomial: value})``.  Work grows as ``n^4``; the grid
    is swept one x1-plane at a time to bound memory.
    """
    conv = QuarticConvention.parse(conv)
    monos = [MonomialSpec.parse(m) if isinstance(m, str) else m for m in monos]
    L = half_width or grid_half_width(params, conv)
    x = np.linspace(-L, L, n)
    h = x[1] - x[0]
    Y1, X2, Y2 = np.meshgrid(x, x, x, indexing="ij")

    def plane(x1):
        return log_w_unnorm(np.stack([np.full_like(Y1, x1), Y1, X2, Y2], axis=-1), params, conv)

    # two sweeps (peak, then sums) instead of holding n^4 values
    peak = max(float(plane(x1).max()) for x1 in x)
    # the endpoints carry negligible weight, so plain sums equal the trapezoid rule
    total = 0.0
    sums = np.zeros(len(monos))
    for x1 in x:
        w = np.exp(plane(x1) - peak)
        total += w.sum()
        for j, m in enumerate(monos):
            sums[j] += np.sum(w * x1 ** m.a * Y1 ** m.b * X2 ** m.c * Y2 ** m.d)
    vol = h ** 4
    norm = 1.0 / (total * vol * math.exp(peak))
    return norm, {str(m): float(sums[j] / total) for j, m in enumerate(monos)}


__all__ = ["McEstimate", "grid_half_width", "grid_moments", "importance_sample", "proposal_scale"]
