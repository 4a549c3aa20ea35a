"""Cross-check the radial quadrature against the 4D grid and importance sampling."""

import sys

from opo_wigner import OpoParams, QuarticConvention, normalize
from opo_wigner.moments import MonomialSpec, moments
from opo_wigner.oracles import grid_moments, importance_sample

MONOS = ["x1^2", "x2^2", "x1 x2", "y1 y2"]


def main():
    for conv in QuarticConvention:
        for mu in (0.5, 1.0, 1.5):
            p = OpoParams(mu, 0.01)
            field = normalize(p, conv)
            quad, _ = moments(field, [MonomialSpec.parse(m) for m in MONOS])
            gnorm, grid = grid_moments(p, conv, MONOS, n=64)
            mc = importance_sample(p, conv, MONOS, n=2_000_000)
            print(f"{conv.value} mu={mu}: norm quad/grid - 1 = {field.norm / gnorm - 1:.2e}")
            for m, q in zip(MONOS, quad):
                z = (mc.values[m] - q) / mc.stderr[m]
                print(f"  <{m}> quad {q:.10f} grid {grid[m]:.10f} "
                      f"mc {mc.values[m]:.5f}+-{mc.stderr[m]:.5f} ({z:+.1f} SE)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
