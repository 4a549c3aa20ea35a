"""EPR variables, linearized variances and the Duan-Simon check."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import Regime, regime

SQRT2 = math.sqrt(2.0)
DUAN_SIMON_BOUND = 2.0


class Divergence:
    """Marker for a variance that is infinite in linearized theory."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIV"

    def __str__(self) -> str:
        return "div"


DIV = Divergence()


def is_div(v) -> bool:
    return v is DIV


class Source(enum.Enum):
    LINEARIZED = "linearized"
    QUADRATURE = "quadrature"
    SDE = "sde"


class EprPoint(NamedTuple):
    x_plus: float
    y_plus: float
    x_minus: float
    y_minus: float


@dataclass(frozen=True)
class EprVariances:
    v_x_plus: float | Divergence
    v_y_plus: float | Divergence
    v_x_minus: float | Divergence
    v_y_minus: float | Divergence
    source: Source = Source.LINEARIZED
    error: float = 0.0

    @property
    def diverges(self) -> bool:
        return any(is_div(v) for v in (self.v_x_plus, self.v_y_plus,
                                       self.v_x_minus, self.v_y_minus))


def epr_transform(p):
    """(x1, y1, x2, y2) -> (x+, y+, x-, y-); works on the last axis of arrays."""
    X = np.asarray(p, dtype=float)
    x1, y1, x2, y2 = X[..., 0], X[..., 1], X[..., 2], X[..., 3]
    out = np.stack([(x1 + x2) / SQRT2, (y1 + y2) / SQRT2,
                    (x1 - x2) / SQRT2, (y1 - y2) / SQRT2], axis=-1)
    if out.ndim == 1:
        return EprPoint(*map(float, out))
    return out


def inverse_epr_transform(e):
    E = np.asarray(e, dtype=float)
    xp, yp, xm, ym = E[..., 0], E[..., 1], E[..., 2], E[..., 3]
    out = np.stack([(xp + xm) / SQRT2, (yp + ym) / SQRT2,
                    (xp - xm) / SQRT2, (yp - ym) / SQRT2], axis=-1)
    return out


def linearized_variances(mu: float, g2: float) -> EprVariances:
    """Closed-form EPR variances of linearized fluctuation theory.

    At threshold the anti-squeezed pair is returned as ``DIV``.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    reg = regime(mu)
    if reg is Regime.THRESHOLD:
        return EprVariances(DIV, 0.5, 0.5, DIV)
    if reg is Regime.BELOW:
        anti = 1.0 / (1.0 - mu)
        sq = 1.0 / (1.0 + mu)
    else:
        if g2 <= 0:
            raise ValueError("g2 must be positive above threshold")
        anti = 1.0 / (mu - 1.0) + (mu - 1.0) / g2
        sq = 0.5
    return EprVariances(v_x_plus=anti, v_y_plus=sq, v_x_minus=sq, v_y_minus=anti)


def w_linear(p, mu: float):
    """Unnormalized linearized Gaussian density (below threshold only)."""
    if not 0 <= mu < 1 or regime(mu) is not Regime.BELOW:
        raise ValueError(f"linearized density is not normalizable at mu={mu}")
    E = np.asarray(epr_transform(p), dtype=float)
    xp, yp, xm, ym = E[..., 0], E[..., 1], E[..., 2], E[..., 3]
    q = (1 + mu) * xm ** 2 + (1 + mu) * yp ** 2 + (1 - mu) * xp ** 2 + (1 - mu) * ym ** 2
    out = np.exp(-0.5 * q)
    return float(out) if out.ndim == 0 else out


def duan_simon_check(v: EprVariances) -> tuple[float, bool]:
    """Sum of the squeezed pair and whether it beats the separable bound 2."""
    if is_div(v.v_x_minus) or is_div(v.v_y_plus):
        raise ValueError("squeezed variances are not populated")
    total = float(v.v_x_minus) + float(v.v_y_plus)
    return total, total < DUAN_SIMON_BOUND
