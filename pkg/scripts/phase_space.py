"""Wigner slices and mode-2 marginals with peak diagnostics."""

import sys
from pathlib import Path

import numpy as np

from opo_wigner import OpoParams, cli, normalize
from opo_wigner.wigner import (conditional_slice, grid_maxima, marginal_exponent_peak,
                               marginal_peak, peak_radius)

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "experiments.toml"
OUT = "out/phase_space"


def main():
    for sub in ("wigner-slice", "marginal"):
        code = cli.main([sub, "--config", str(CONFIG), "--out", OUT])
        if code:
            return code
    x = np.linspace(-15, 15, 121)
    print("slice maxima on the y1 = y2 = 0 plane")
    for mu in (0.5, 0.9, 1.0, 1.05, 1.1, 1.5):
        field = normalize(OpoParams(mu, 0.01))
        peaks = grid_maxima(conditional_slice(x, x, field), x, x)
        print(f"  mu={mu:<5} maxima={peaks} expected radius={peak_radius(field.params, field.convention):.4f}")
    print("marginal peak r^2 (numeric, closed form, exponent-only)")
    for mu in (1.2, 1.5):
        field = normalize(OpoParams(mu, 0.01))
        print(f"  mu={mu:<5} {marginal_peak(field):.4f} {marginal_peak(field, 'closed_form'):.4f} "
              f"{marginal_exponent_peak(field):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
