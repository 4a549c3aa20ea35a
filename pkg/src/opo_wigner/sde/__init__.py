"""Stochastic phase-space integrators and ensemble statistics.

Three models are available:

* :func:`simulate_two_mode`: truncated-Wigner quadrature equations with
  the pump adiabatically eliminated; the multiplicative noise columns can
  be switched off.
* :func:`simulate_three_mode`: truncated-Wigner equations for pump,
  signal and idler without elimination.
* :func:`simulate_positive_p`: positive-P equations (normally ordered
  moments), converted to symmetric order for comparison.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

# TBB is tried first by default and warns when the installed version is too old
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from ..linearized import EprVariances, Source
from ..params import OpoParams
from . import kernels
from .rng import split_seed

log = logging.getLogger(__name__)

THREADS_ENV = "OPO_WIGNER_THREADS"
MAX_ESCAPE_FRACTION = 0.01


class SimulationError(RuntimeError):
    """Integration failed (escape rate above tolerance or invalid setup)."""

    def __init__(self, msg, stats=None):
        super().__init__(msg)
        self.stats = stats


def configure_threads() -> int:
    """Apply the thread cap from ``OPO_WIGNER_THREADS``; returns threads in use."""
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
    return numba.get_num_threads()


@dataclass(frozen=True)
class IntegratorConfig:
    """Time step and window in units of 1/gamma; ``burn_in`` is discarded."""

    dt: float = 1e-3
    t_end: float = 50.0
    burn_in: float = 20.0
    n_traj: int = 10_000
    seed: int = 0
    scheme: str = "euler_maruyama"
    batches: int = 100
    escape_bound: float = 1e3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.burn_in < self.t_end:
            raise ValueError("need 0 <= burn_in < t_end")
        if self.n_traj < 2:
            raise ValueError("n_traj must be >= 2")
        if self.scheme != "euler_maruyama":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        split_seed(self.seed)

    def steps(self, gamma: float) -> tuple[int, int]:
        """(total steps, burn-in steps) for a physical damping ``gamma``."""
        n = int(round(self.t_end / self.dt))
        b = int(round(self.burn_in / self.dt))
        if n - b < 1:
            raise ValueError("empty sampling window")
        return n, b


@dataclass
class EnsembleStats:
    """Named observables with standard errors from trajectory batch means."""

    method: str
    values: dict[str, float]
    stderr: dict[str, float]
    n_traj: int
    n_escaped: int
    escapes: list[tuple[int, float]] = field(default_factory=list)
    final_states: np.ndarray | None = field(default=None, repr=False)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def se(self, name: str) -> float:
        return self.stderr[name]

    def epr(self) -> EprVariances:
        return EprVariances(self.values["v_x_plus"], self.values["v_y_plus"],
                            self.values["v_x_minus"], self.values["v_y_minus"],
                            source=Source.SDE,
                            error=max(self.stderr[k] for k in
                                      ("v_x_plus", "v_y_plus", "v_x_minus", "v_y_minus")))

    def rows(self) -> list[list]:
        return [[k, self.values[k], self.stderr[k]] for k in self.values]

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "final_states"}
        d["escapes"] = [list(e) for e in self.escapes]
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# drift and noise of the eliminated model


def drift_two_mode(X, params: OpoParams) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    x1, y1, x2, y2 = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    h = 0.5 * params.g2
    mu = params.mu
    r1 = x1 * x1 + y1 * y1
    r2 = x2 * x2 + y2 * y2
    return params.gamma * np.stack([-x1 + mu * x2 - h * x1 * r2,
                                    -y1 - mu * y2 - h * y1 * r2,
                                    -x2 + mu * x1 - h * x2 * r1,
                                    -y2 - mu * y1 - h * y2 * r1], axis=-1)


def noise_matrix(X, params: OpoParams, mult_noise: bool = True) -> np.ndarray:
    x1, y1, x2, y2 = (float(v) for v in np.asarray(X, dtype=float))
    c = params.g / math.sqrt(2.0) if mult_noise else 0.0
    M = c * np.array([[x2, y2], [-y2, x2], [x1, y1], [-y1, x1]])
    return math.sqrt(2.0 * params.gamma) * np.hstack([np.eye(4), M])


# ---------------------------------------------------------------------------
# statistics


def _batch_slices(n: int, batches: int) -> list[slice]:
    nb = max(2, min(batches, n // 2))
    edges = [(k * n) // nb for k in range(nb + 1)]
    return [slice(edges[k], edges[k + 1]) for k in range(nb)]


def _quadrature_functionals(m: dict[str, float], vacuum: float) -> dict[str, float]:
    """Variances, covariances and EPR variances from raw moments.

    ``vacuum`` is added to each same-quadrature variance (1 converts
    normally ordered moments to symmetric order, 0 for Wigner moments).
    """
    out = {}
    for q in ("x1", "y1", "x2", "y2"):
        out[f"mean_{q}"] = m[q]
        out[f"var_{q}"] = m[q + q] - m[q] ** 2 + vacuum
    for a, b in (("x1", "x2"), ("y1", "y2"), ("x1", "y1"), ("x2", "y2"),
                 ("x1", "y2"), ("y1", "x2")):
        out[f"cov_{a}{b}"] = m[a + b] - m[a] * m[b]
    out["v_x_plus"] = 0.5 * (out["var_x1"] + out["var_x2"] + 2 * out["cov_x1x2"])
    out["v_x_minus"] = 0.5 * (out["var_x1"] + out["var_x2"] - 2 * out["cov_x1x2"])
    out["v_y_plus"] = 0.5 * (out["var_y1"] + out["var_y2"] + 2 * out["cov_y1y2"])
    out["v_y_minus"] = 0.5 * (out["var_y1"] + out["var_y2"] - 2 * out["cov_y1y2"])
    # mean off-diagonal diffusion entries c and d (without the g2/2 factor)
    out["mean_c"] = m["x1x2"] + m["y1y2"]
    out["mean_d"] = m["x1y2"] - m["y1x2"]
    out["mean_r1"] = m["x1x1"] + m["y1y1"]
    out["mean_r2"] = m["x2x2"] + m["y2y2"]
    return out


def _reduce(avg: np.ndarray, names, functionals, batches: int):
    """Apply ``functionals`` to the ensemble means, with batch-mean errors."""
    def evaluate(block):
        means = block.mean(axis=0)
        return functionals(dict(zip(names, means.tolist())))

    total = evaluate(avg)
    per_batch = [evaluate(avg[s]) for s in _batch_slices(len(avg), batches)]
    nb = len(per_batch)
    stderr = {}
    for k in total:
        arr = np.array([b[k] for b in per_batch])
        stderr[k] = float(arr.std(ddof=1) / math.sqrt(nb))
    return {k: float(v) for k, v in total.items()}, stderr


def _escape_check(method, esc_step, cfg, dt):
    escaped = np.nonzero(esc_step >= 0)[0]
    escapes = [(int(i), float((esc_step[i] + 1) * dt)) for i in escaped]
    for i, t in escapes:
        log.warning("%s: trajectory %d escaped at t=%.6g", method, i, t)
    return escapes


def _snapshot(xm: np.ndarray, vacuum: float):
    """Columns (x_-, x_-^2) at the final time for the ensemble-average estimate."""
    return np.stack([xm, xm * xm], axis=1), ("xm", "xmxm"), (
        lambda m: {"snap_v_x_minus": m["xmxm"] - m["xm"] ** 2 + vacuum})


def _finish(method, avg, final, esc_step, cfg, dt, names, functionals, snapshot=None):
    escapes = _escape_check(method, esc_step, cfg, dt)
    keep = esc_step < 0
    n_ok = int(keep.sum())
    if n_ok < 2:
        raise SimulationError(f"{method}: fewer than two trajectories survived")
    values, stderr = _reduce(avg[keep], names, functionals, cfg.batches)
    if snapshot is not None:
        # ensemble average at t_end, next to the time average above
        cols, snames, sfun = snapshot
        v, e = _reduce(cols[keep], snames, sfun, cfg.batches)
        values.update(v)
        stderr.update(e)
    stats = EnsembleStats(method=method, values=values, stderr=stderr, n_traj=n_ok,
                          n_escaped=len(escapes), escapes=escapes,
                          final_states=final)
    if len(escapes) > MAX_ESCAPE_FRACTION * cfg.n_traj:
        raise SimulationError(
            f"{method}: {len(escapes)} of {cfg.n_traj} trajectories escaped", stats)
    return stats


def _check_dt(cfg: IntegratorConfig, rate: float):
    if cfg.dt * rate > 0.5:
        raise SimulationError(f"dt={cfg.dt} is unstable for damping rate {rate}")


# ---------------------------------------------------------------------------
# public integrators


def simulate_two_mode(params: OpoParams, cfg: IntegratorConfig = IntegratorConfig(),
                      mult_noise: bool = True, noise: bool = True) -> EnsembleStats:
    """Two-mode quadrature SDEs dX = A dt + B dW with six Wiener increments.

    Time runs in units of 1/gamma as configured in ``cfg``; trajectories
    start from a vacuum sample (unit variance per quadrature).
    """
    configure_threads()
    dt = cfg.dt / params.gamma
    _check_dt(cfg, 1.0 + params.mu)
    n, b = cfg.steps(params.gamma)
    lo, hi = split_seed(cfg.seed)
    bound2 = 4.0 * cfg.escape_bound ** 2  # |alpha| bound in quadrature units
    avg, final, esc = kernels.two_mode_kernel(
        cfg.n_traj, n, b, dt, params.gamma, params.mu, params.g2,
        1.0 if mult_noise else 0.0, 1.0 if noise else 0.0, lo, hi, bound2)
    method = "two_mode" + ("" if mult_noise else "_no_mult")
    snap = _snapshot((final[:, 0] - final[:, 2]) / math.sqrt(2.0), 0.0)
    return _finish(method, avg, final, esc, cfg, dt, kernels.QUAD_OBS,
                   lambda m: _quadrature_functionals(m, 0.0), snap)


def _pump_functionals(m, vacuum, params):
    out = _quadrature_functionals(m, vacuum)
    out["re_a0"] = m["re_a0"]
    out["im_a0"] = m["im_a0"]
    out["re_a1a2"] = m["re_a1a2"]
    out["im_a1a2"] = m["im_a1a2"]
    # stationarity of the pump equation: <alpha0> = (E - chi <alpha1 alpha2>) / gamma0
    if params.g2 > 0:
        out["pump_balance"] = (params.pump - params.chi * m["re_a1a2"]) / params.gamma0
    else:
        out["pump_balance"] = m["re_a0"]
    return out


def simulate_three_mode(params: OpoParams, cfg: IntegratorConfig = IntegratorConfig(),
                        noise: bool = True) -> EnsembleStats:
    """Truncated-Wigner equations for pump, signal and idler (no elimination)."""
    if params.gamma_r < 2:
        raise ValueError("three-mode comparison needs gamma0/gamma >= 2")
    if cfg.dt / params.gamma * params.gamma0 > 0.1 + 1e-12:
        raise ValueError("dt must satisfy dt <= 0.1/gamma0")
    if params.g2 == 0:
        raise ValueError("three-mode model needs g2 > 0 to define the pump amplitude")
    configure_threads()
    dt = cfg.dt / params.gamma
    n, b = cfg.steps(params.gamma)
    lo, hi = split_seed(cfg.seed)
    avg, final, esc = kernels.three_mode_kernel(
        cfg.n_traj, n, b, dt, params.gamma, params.gamma0, params.chi, params.pump,
        1.0 if noise else 0.0, lo, hi, cfg.escape_bound ** 2)
    # x_i = 2 Re alpha_i
    snap = _snapshot(math.sqrt(2.0) * (final[:, 2] - final[:, 4]), 0.0)
    return _finish("three_mode", avg, final, esc, cfg, dt, kernels.THREE_MODE_OBS,
                   lambda m: _pump_functionals(m, 0.0, params), snap)


def simulate_positive_p(params: OpoParams, cfg: IntegratorConfig = IntegratorConfig(),
                        noise: bool = True) -> EnsembleStats:
    """Positive-P equations; variances are reported in symmetric order.

    Normally ordered quantities are kept under ``n_``-prefixed names.
    """
    if params.g2 == 0:
        raise ValueError("positive-P model needs g2 > 0 to define the pump amplitude")
    if cfg.dt / params.gamma * params.gamma0 > 0.1 + 1e-12:
        raise ValueError("dt must satisfy dt <= 0.1/gamma0")
    configure_threads()
    dt = cfg.dt / params.gamma
    n, b = cfg.steps(params.gamma)
    lo, hi = split_seed(cfg.seed)
    avg, final, esc = kernels.positive_p_kernel(
        cfg.n_traj, n, b, dt, params.gamma, params.gamma0, params.chi, params.pump,
        1.0 if noise else 0.0, lo, hi, cfg.escape_bound ** 2)

    def functionals(m):
        sym = _pump_functionals(m, 1.0, params)
        normal = _quadrature_functionals(m, 0.0)
        for k in ("var_x1", "var_y1", "var_x2", "var_y2",
                  "v_x_plus", "v_x_minus", "v_y_plus", "v_y_minus"):
            sym["n_" + k] = normal[k]
        return sym

    # x_- = (X1 - X2)/sqrt2 with X = alpha + beta; real parts give the normal-order moments
    a1 = final[:, 4] + 1j * final[:, 5]
    b1 = final[:, 6] + 1j * final[:, 7]
    a2 = final[:, 8] + 1j * final[:, 9]
    b2 = final[:, 10] + 1j * final[:, 11]
    xm = (a1 + b1 - a2 - b2) / math.sqrt(2.0)
    snap = (np.stack([xm.real, (xm * xm).real], axis=1), ("xm", "xmxm"),
            lambda m: {"snap_v_x_minus": m["xmxm"] - m["xm"] ** 2 + 1.0})
    return _finish("positive_p", avg, final, esc, cfg, dt, kernels.POSITIVE_P_OBS, functionals,
                   snap)


__all__ = ["EnsembleStats", "IntegratorConfig", "SimulationError", "configure_threads",
           "drift_two_mode", "noise_matrix", "simulate_positive_p", "simulate_three_mode",
           "simulate_two_mode"]
