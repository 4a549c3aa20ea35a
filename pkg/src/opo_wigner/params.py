"""Control parameters, dimensionless rescaling and classical steady states."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

THRESHOLD_TOL = 1e-12
MIN_GAMMA_RATIO = 10.0


class Regime(enum.Enum):
    BELOW = "below"
    THRESHOLD = "threshold"
    ABOVE = "above"


@dataclass(frozen=True)
class OpoParams:
    """Dimensionless OPO control parameters.

    ``mu`` is the pump relative to threshold and ``g2`` the squared
    nonlinear coupling.  ``gamma`` and ``gamma0`` are the signal/idler and
    pump damping rates; signal and idler always share one damping rate.
    """

    mu: float
    g2: float
    gamma: float = 1.0
    gamma0: float = 10.0

    def __post_init__(self):
        for name in ("mu", "g2", "gamma", "gamma0"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.g2 < 0:
            raise ValueError(f"g2 must be >= 0, got {self.g2}")
        if self.gamma <= 0 or self.gamma0 <= 0:
            raise ValueError("damping rates must be positive")

    @property
    def g(self) -> float:
        return math.sqrt(self.g2)

    @property
    def gamma_r(self) -> float:
        return self.gamma0 / self.gamma

    @property
    def chi(self) -> float:
        """Coupling constant chi (units 1/time) implied by g and the dampings."""
        return self.g * math.sqrt(2.0 * self.gamma * self.gamma0)

    @property
    def pump(self) -> float:
        """External pump amplitude E (units 1/time); requires g2 > 0."""
        if self.g2 == 0:
            raise ValueError("pump amplitude undefined for g2 = 0")
        return self.mu * self.gamma * self.gamma0 / self.chi

    @property
    def regime(self) -> Regime:
        return regime(self.mu)

    def adiabatic_ok(self, min_ratio: float = MIN_GAMMA_RATIO) -> bool:
        return self.gamma_r >= min_ratio

    def with_mu(self, mu: float) -> "OpoParams":
        return OpoParams(mu=mu, g2=self.g2, gamma=self.gamma, gamma0=self.gamma0)


def regime(mu: float) -> Regime:
    if abs(mu - 1.0) <= THRESHOLD_TOL:
        return Regime.THRESHOLD
    return Regime.BELOW if mu < 1.0 else Regime.ABOVE


def s_factor(mu):
    """Effective diffusion scale: 1 at or below threshold, ``mu`` above.

    Accepts scalars or arrays.
    """
    arr = np.asarray(mu, dtype=float)
    if np.any(arr < 0):
        raise ValueError("mu must be >= 0")
    out = np.maximum(arr, 1.0)
    return float(out) if out.ndim == 0 else out


def rescale_params(chi: float, gamma: float, gamma0: float, E: float) -> OpoParams:
    """Map physical rates (chi, gamma, gamma0, E) onto ``OpoParams``."""
    if gamma <= 0 or gamma0 <= 0:
        raise ValueError("damping rates must be positive")
    if chi < 0 or E < 0:
        raise ValueError("chi and E must be non-negative")
    g = chi / math.sqrt(2.0 * gamma * gamma0)
    mu = chi * E / (gamma * gamma0)
    return OpoParams(mu=mu, g2=g * g, gamma=gamma, gamma0=gamma0)


def physical_params(params: OpoParams) -> tuple[float, float, float, float]:
    """Inverse of :func:`rescale_params`: returns (chi, gamma, gamma0, E)."""
    return params.chi, params.gamma, params.gamma0, params.pump


@dataclass(frozen=True)
class FixedPoints:
    """Classical steady states of the two-mode drift.

    Above threshold the nonzero solutions form a ring with per-mode
    intensity ``intensity`` and locked phase sum; ``representative`` is the
    point (x, 0, x, 0) on that ring.
    """

    origin_stable: bool
    intensity: float = 0.0
    representative: np.ndarray | None = None

    @property
    def radius(self) -> float:
        return math.sqrt(self.intensity)

    @property
    def points(self) -> list[np.ndarray]:
        pts = [np.zeros(4)]
        if self.representative is not None:
            pts.append(self.representative)
        return pts


def classical_fixed_points(params: OpoParams) -> FixedPoints:
    reg = params.regime
    if reg is not Regime.ABOVE:
        # at threshold the origin is marginal (zero eigenvalue); reported as stable
        return FixedPoints(origin_stable=True)
    if params.g2 == 0:
        raise ValueError("no bounded steady state above threshold with g2 = 0")
    intensity = 2.0 * (params.mu - 1.0) / params.g2
    x = math.sqrt(intensity)
    return FixedPoints(origin_stable=False, intensity=intensity,
                       representative=np.array([x, 0.0, x, 0.0]))


def ring_point(params: OpoParams, theta: float) -> np.ndarray:
    """Point on the above-threshold ring with signal phase ``theta``.

    The idler carries phase ``-theta`` so that the phase sum stays locked.
    """
    fp = classical_fixed_points(params)
    r = fp.radius
    return np.array([r * math.cos(theta), r * math.sin(theta),
                     r * math.cos(theta), -r * math.sin(theta)])
