"""EPR variances across threshold: linearized versus quadrature.

Pass ``--sde`` to append two-mode SDE rows (slow: one ensemble per mu).
"""

import sys
from pathlib import Path

from opo_wigner import cli
from opo_wigner.csvio import read_csv

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "experiments.toml"
OUT = Path("out/variance_sweep")


def main(argv):
    code = cli.main(["variance-sweep", "--config", str(CONFIG), "--out", str(OUT), *argv])
    if code:
        return code
    _, rows = read_csv(OUT / "variance_table.csv")
    print(f"{'mu':>5} {'source':>22} {'<x+^2>':>12} {'<x-^2>':>10}")
    for r in rows:
        vxp = r[2] if r[2] == "div" else f"{float(r[2]):.4f}"
        print(f"{float(r[0]):>5.2f} {r[1]:>22} {vxp:>12} {float(r[3]):>10.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
