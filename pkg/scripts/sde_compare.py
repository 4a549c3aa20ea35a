"""Squeezed variance from positive-P and two-mode Wigner ensembles.

Usage: python scripts/sde_compare.py [--traj N] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

from opo_wigner import cli
from opo_wigner.csvio import read_csv

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "experiments.toml"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--traj", type=int, default=2000)
    ap.add_argument("--out", default="out/sde_compare")
    args = ap.parse_args()
    code = cli.main(["sde-compare", "--config", str(CONFIG), "--traj", str(args.traj),
                     "--out", args.out])
    if code:
        return code
    header, rows = read_csv(Path(args.out) / "sde_compare.csv")
    print(f"{'mu':>6} {'positive-P':>18} {'with noise':>18} {'without noise':>18}")
    for r in rows:
        cells = [f"{float(r[i]):.4f}+-{float(r[i + 1]):.4f}" for i in (1, 3, 5)]
        print(f"{float(r[0]):>6.2f} " + " ".join(f"{c:>18}" for c in cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
