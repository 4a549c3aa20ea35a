"""Command-line front end.

Subcommands write CSV files into ``--out`` (default ``out/``)::

    opo-wigner variance-sweep  --mu 0.5,1.0,1.5
    opo-wigner sde-compare     --mu 0.5 --traj 2000
    opo-wigner wigner-slice    --mu 1.5 --plot-script
    opo-wigner marginal        --mu 1.2
    opo-wigner potential-check

Settings are resolved as built-in defaults, then the subcommand's section of
the ``--config`` TOML file, then explicit flags.  Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 physics expectation failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from . import csvio
from .moments import VarianceRow, VarianceTable, variance_sweep
from .params import OpoParams
from .potential import DOCUMENTED_POINT, FD_STEP, curl_report
from .wigner import (NonNormalizableError, QuadratureError, QuarticConvention,
                     conditional_slice, grid_maxima, marginal, normalize)

log = logging.getLogger("opo_wigner")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PHYSICS = 0, 2, 3, 4

APPROX_CURL_TOL = 1e-8
EXACT_CURL_MIN = 1e-6


class ConfigError(ValueError):
    pass


class PhysicsError(RuntimeError):
    pass


class NumericalError(RuntimeError):
    pass


def _grid(start, stop, step):
    n = int(round((stop - start) / step))
    return [round(start + k * step, 12) for k in range(n + 1)]


# Defaults: g2 = 0.01 everywhere, gamma0 = 10 gamma.
COMMON = dict(g2=0.01, gamma0=10.0, seed=0, out="out", convention="appendixB",
              traj=10_000, dt=1e-3, tend=50.0, burnin=20.0, mult_noise=True,
              rtol=1e-8)
DEFAULTS = {
    "variance-sweep": dict(mu=_grid(0.1, 2.0, 0.05), sde=False, both_conventions=False),
    "sde-compare": dict(mu=_grid(0.25, 2.0, 0.25)),
    "wigner-slice": dict(mu=[0.5, 1.0, 1.5], xmin=-15.0, xmax=15.0, n=121,
                         plot_script=False),
    "marginal": dict(mu=[0.8, 1.2], xmin=-10.0, xmax=10.0, n=101, method="numeric",
                     plot_script=False),
    "potential-check": dict(mu=[0.5], n_points=100, box=3.0, variant="printed"),
}
_TYPES = dict(g2=float, gamma0=float, seed=int, out=str, convention=str, traj=int,
              dt=float, tend=float, burnin=float, mult_noise=bool, rtol=float, sde=bool,
              both_conventions=bool, xmin=float, xmax=float, n=int, plot_script=bool,
              method=str, n_points=int, box=float, variant=str)


@dataclass
class RunConfig:
    """Resolved settings for one subcommand."""

    command: str
    values: dict

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def out_dir(self) -> Path:
        return Path(self.values["out"])

    def params(self, mu: float) -> OpoParams:
        return OpoParams(mu=mu, g2=self.g2, gamma=1.0, gamma0=self.gamma0)

    def integrator(self):
        from .sde import IntegratorConfig
        return IntegratorConfig(dt=self.dt, t_end=self.tend, burn_in=self.burnin,
                                n_traj=self.traj, seed=self.seed)


def parse_mu_list(text) -> list[float]:
    """``0.5,1,1.5`` or ``start:stop:step`` (inclusive)."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"bad mu range {text!r}; use start:stop:step")
        return _grid(*parts)
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad mu list {text!r}") from exc


def _coerce(key, value):
    if key == "mu":
        return parse_mu_list(value)
    typ = _TYPES[key]
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if typ is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{key} must be an integer")
    try:
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def resolve(command: str, file_data: dict | None, flags: dict) -> RunConfig:
    """Merge defaults, the file section for ``command`` and explicit flags."""
    values = dict(COMMON)
    values.update(DEFAULTS[command])
    section = (file_data or {}).get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{command}] must be a table")
    for key, value in section.items():
        key = key.replace("-", "_")
        if key not in values:
            raise ConfigError(f"unknown key {key!r} in [{command}]")
        values[key] = _coerce(key, value)
    for key, value in flags.items():
        if value is not None:
            values[key] = _coerce(key, value)
    _validate(command, values)
    return RunConfig(command, values)


def _validate(command, v):
    try:
        QuarticConvention.parse(v["convention"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    mus = v["mu"]
    if not mus or any(not math.isfinite(m) or m < 0 for m in mus):
        raise ConfigError("mu values must be finite and >= 0")
    if command == "variance-sweep" and mus != sorted(mus):
        raise ConfigError("mu grid must be ascending")
    if not v["g2"] >= 0 or not v["gamma0"] > 0:
        raise ConfigError("need g2 >= 0 and gamma0 > 0")
    if not 0 <= v["seed"] < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if v["dt"] <= 0 or v["traj"] < 2 or not 0 <= v["burnin"] < v["tend"]:
        raise ConfigError("need dt > 0, traj >= 2 and 0 <= burnin < tend")
    if "n" in v and v["n"] < 3:
        raise ConfigError("grid needs at least 3 points per axis")
    if "xmin" in v and not v["xmin"] < v["xmax"]:
        raise ConfigError("need xmin < xmax")
    if v.get("method", "numeric") not in ("numeric", "closed_form"):
        raise ConfigError("method must be numeric or closed_form")
    if v.get("variant", "printed") not in ("printed", "swapped", "derived"):
        raise ConfigError("variant must be printed, swapped or derived")


# ---------------------------------------------------------------------------
# subcommands


def _fmt_mu(mu: float) -> str:
    # shortest round-trip form keeps file names readable (0.8, not 0.80000000000000004)
    return repr(float(mu))


def _sde_row(mu, params, cfg: RunConfig) -> VarianceRow:
    from .sde import simulate_two_mode
    stats = simulate_two_mode(params, cfg.integrator(), mult_noise=cfg.mult_noise)
    v = stats.epr()
    return VarianceRow.from_variances(mu, v, "sde" if cfg.mult_noise else "sde:no_mult")


def cmd_variance_sweep(cfg: RunConfig) -> list[Path]:
    """Linearized and quadrature EPR variances (optionally SDE rows) over the mu grid."""
    convs = ([QuarticConvention.APPENDIX_B, QuarticConvention.AS_PRINTED]
             if cfg.both_conventions else [QuarticConvention.parse(cfg.convention)])
    table = variance_sweep(cfg.mu, cfg.g2, conventions=convs, rtol=cfg.rtol,
                           gamma0=cfg.gamma0)
    if cfg.sde:
        for mu in cfg.mu:
            table.add(_sde_row(mu, cfg.params(mu), cfg))
        table.sort()
    path = cfg.out_dir / "variance_table.csv"
    csvio.write_csv(path, VarianceTable.HEADER, table.to_rows())
    return [path]


SDE_COMPARE_HEADER = ["mu", "positive_p", "positive_p_se", "with_noise", "with_noise_se",
                      "without_noise", "without_noise_se", "n_escaped", "status"]


def cmd_sde_compare(cfg: RunConfig) -> list[Path]:
    """Squeezed variance v_x_minus from the three stochastic models."""
    from .sde import SimulationError, simulate_positive_p, simulate_two_mode

    icfg = cfg.integrator()
    stats_dir = cfg.out_dir / "stats"
    stats_dir.mkdir(parents=True, exist_ok=True)
    rows, summary, failed = [], {}, False
    runs = (("positive_p", lambda p: simulate_positive_p(p, icfg)),
            ("with_noise", lambda p: simulate_two_mode(p, icfg, mult_noise=True)),
            ("without_noise", lambda p: simulate_two_mode(p, icfg, mult_noise=False)))
    for mu in cfg.mu:
        params = cfg.params(mu)
        row, status, escaped = [mu], "ok", 0
        for name, run in runs:
            try:
                st = run(params)
            except SimulationError as exc:
                log.error("mu=%s %s: %s", mu, name, exc)
                status, failed = f"fail:{name}", True
                row += ["nan", "nan"]
                continue
            escaped += st.n_escaped
            row += [st["v_x_minus"], st.se("v_x_minus")]
            tag = f"{name}_mu{_fmt_mu(mu)}"
            csvio.write_csv(stats_dir / f"{tag}.csv", ["name", "value", "stderr"], st.rows())
            summary[tag] = st.summary()
        rows.append(row + [escaped, status])
    path = cfg.out_dir / "sde_compare.csv"
    csvio.write_csv(path, SDE_COMPARE_HEADER, rows)
    jpath = cfg.out_dir / "sde_compare.json"
    jpath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if failed:
        raise NumericalError("one or more runs exceeded the escape tolerance")
    return [path, jpath]


def _axis(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.xmin, cfg.xmax, cfg.n)


def _plot_script(csv_name: str, xlab: str, ylab: str, title: str) -> str:
    return "\n".join([
        "# gnuplot commands; run with: gnuplot -p <this file>",
        "set datafile separator ','",
        f"set title '{title}'",
        f"set xlabel '{xlab}'",
        f"set ylabel '{ylab}'",
        "set view map",
        "set pm3d at b",
        f"splot '{csv_name}' every ::1 using 1:2:3 with pm3d notitle",
        "",
    ])


def _grid_rows(a, b, values):
    return [[float(a[i]), float(b[j]), float(values[i, j])]
            for i in range(len(a)) for j in range(len(b))]


def cmd_wigner_slice(cfg: RunConfig) -> list[Path]:
    """W(x1, 0, x2, 0) on a square grid for each mu."""
    conv = QuarticConvention.parse(cfg.convention)
    x = _axis(cfg)
    out = []
    for mu in cfg.mu:
        field = normalize(cfg.params(mu), conv, cfg.rtol)
        w = conditional_slice(x, x, field)
        peaks = grid_maxima(w, x, x)
        log.info("mu=%s slice maxima: %s", mu, peaks)
        name = f"slice_mu{_fmt_mu(mu)}.csv"
        out.append(csvio.write_csv(cfg.out_dir / name, ["x1", "x2", "w"], _grid_rows(x, x, w)))
        if cfg.plot_script:
            p = cfg.out_dir / f"slice_mu{_fmt_mu(mu)}.gp"
            p.write_text(_plot_script(name, "x1", "x2", f"W(x1,0,x2,0), mu={mu}"))
            out.append(p)
    return out


def cmd_marginal(cfg: RunConfig) -> list[Path]:
    """Mode-2 marginal on a square (x2, y2) grid for each mu."""
    conv = QuarticConvention.parse(cfg.convention)
    x = _axis(cfg)
    X2, Y2 = np.meshgrid(x, x, indexing="ij")
    out = []
    for mu in cfg.mu:
        field = normalize(cfg.params(mu), conv, cfg.rtol)
        w = marginal(X2, Y2, field, cfg.method)
        name = f"marginal_mu{_fmt_mu(mu)}.csv"
        out.append(csvio.write_csv(cfg.out_dir / name, ["x2", "y2", "w"], _grid_rows(x, x, w)))
        if cfg.plot_script:
            p = cfg.out_dir / f"marginal_mu{_fmt_mu(mu)}.gp"
            p.write_text(_plot_script(name, "x2", "y2", f"marginal of mode 2, mu={mu}"))
            out.append(p)
    return out


CURL_HEADER = ["mu", "x1", "y1", "x2", "y2", "max_curl", "field"]


def cmd_potential_check(cfg: RunConfig) -> list[Path]:
    """Curl norms of both potential fields at the documented point and random points.

    Passes when the mean-diffusion field is curl-free everywhere and the
    exact field fails somewhere (for g2 > 0; both are curl-free at g2 = 0).
    """
    rng = np.random.default_rng(cfg.seed)
    pts = [DOCUMENTED_POINT] + [tuple(p) for p in
                                rng.uniform(-cfg.box, cfg.box, size=(cfg.n_points, 4))]
    rows, problems = [], []
    for mu in cfg.mu:
        params = cfg.params(mu)
        report = curl_report(params, pts, cfg.variant, FD_STEP)
        for r in report:
            rows.append([mu, *r.point, r.max_curl, r.tag])
        approx = max(r.max_curl for r in report if r.tag == "approx")
        exact = max(r.max_curl for r in report if r.tag != "approx")
        if approx >= APPROX_CURL_TOL:
            problems.append(f"mu={mu}: approximate field curl {approx:.3g} >= {APPROX_CURL_TOL}")
        if cfg.g2 > 0 and exact <= EXACT_CURL_MIN:
            problems.append(f"mu={mu}: exact field unexpectedly curl-free ({exact:.3g})")
        if cfg.g2 == 0 and exact >= APPROX_CURL_TOL:
            problems.append(f"mu={mu}: exact field at g2=0 has curl {exact:.3g}")
    path = csvio.write_csv(cfg.out_dir / "curl_report.csv", CURL_HEADER, rows)
    if problems:
        raise PhysicsError("; ".join(problems))
    return [path]


COMMANDS = {
    "variance-sweep": cmd_variance_sweep,
    "sde-compare": cmd_sde_compare,
    "wigner-slice": cmd_wigner_slice,
    "marginal": cmd_marginal,
    "potential-check": cmd_potential_check,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opo-wigner", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.split("\n")[0])
        p.add_argument("-v", "--verbose", action="store_true")
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--mu", metavar="LIST", help="comma list or start:stop:step")
        p.add_argument("--g2", type=float, metavar="F")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--convention", choices=[c.value for c in QuarticConvention])
        p.add_argument("--traj", type=int, metavar="N")
        p.add_argument("--dt", type=float, metavar="F")
        p.add_argument("--tend", type=float, metavar="F")
        p.add_argument("--burnin", type=float, metavar="F")
        p.add_argument("--no-mult-noise", dest="mult_noise", action="store_const",
                       const=False, default=None)
        if name == "variance-sweep":
            p.add_argument("--sde", action="store_const", const=True, default=None,
                           help="append two-mode SDE rows")
            p.add_argument("--both-conventions", action="store_const", const=True,
                           default=None)
        if name in ("wigner-slice", "marginal"):
            p.add_argument("--plot-script", action="store_const", const=True, default=None,
                           help="also write a gnuplot script per grid")
    return parser


_FLAG_KEYS = ("mu", "g2", "seed", "out", "convention", "traj", "dt", "tend", "burnin",
              "mult_noise", "sde", "both_conventions", "plot_script")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_data = load_config_file(args.config) if args.config else None
        flags = {k: getattr(args, k, None) for k in _FLAG_KEYS}
        cfg = resolve(args.command, file_data, flags)
        for mu in cfg.mu:
            cfg.params(mu)  # validates the parameter set
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    from .sde import SimulationError, configure_threads
    configure_threads()
    try:
        paths = COMMANDS[args.command](cfg)
    except NonNormalizableError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"physics check failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (QuadratureError, SimulationError, NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # parameter combinations rejected by the library (e.g. g2 = 0 above threshold)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
