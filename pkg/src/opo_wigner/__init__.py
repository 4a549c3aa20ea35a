"""Steady-state quantum statistics of the nondegenerate OPO in phase space."""

from .params import OpoParams, Regime, classical_fixed_points, rescale_params, s_factor
from .wigner import (NonNormalizableError, PhasePoint, QuarticConvention, WignerField,
                     log_w_unnorm, normalize)

__all__ = [
    "OpoParams", "Regime", "classical_fixed_points", "rescale_params", "s_factor",
    "NonNormalizableError", "PhasePoint", "QuarticConvention", "WignerField",
    "log_w_unnorm", "normalize",
]
