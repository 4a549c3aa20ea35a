"""Polynomial moments of the analytic Wigner field and EPR variance tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import linearized
from .linearized import DIV, EprVariances, Source
from .params import OpoParams
from .wigner import (DEFAULT_RTOL, QuarticConvention, RadialSpec, WignerField, normalize,
                     radial_integrals)

MAX_DEGREE = 8


class DegreeError(ValueError):
    pass


@dataclass(frozen=True)
class MonomialSpec:
    """Exponents (a, b, c, d) of x1^a y1^b x2^c y2^d."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("exponents must be non-negative")

    @property
    def degree(self) -> int:
        return self.a + self.b + self.c + self.d

    @classmethod
    def parse(cls, text: str) -> "MonomialSpec":
        """Parse names like ``x1^2 x2`` or ``x1*y2``."""
        exps = dict(x1=0, y1=0, x2=0, y2=0)
        for tok in text.replace("*", " ").split():
            name, _, power = tok.partition("^")
            if name not in exps:
                raise ValueError(f"unknown variable {name!r}")
            exps[name] += int(power) if power else 1
        return cls(exps["x1"], exps["y1"], exps["x2"], exps["y2"])

    def __str__(self) -> str:
        parts = []
        for name, e in zip(("x1", "y1", "x2", "y2"), (self.a, self.b, self.c, self.d)):
            if e:
                parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts) or "1"


# Gaussian rationals as (re, im) Fraction pairs; a trig polynomial in theta is
# a dict harmonic -> coefficient of exp(i m theta).

def _cmul(u, v):
    return (u[0] * v[0] - u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def _polymul(p, q):
    out = {}
    for m, u in p.items():
        for n, v in q.items():
            w = _cmul(u, v)
            acc = out.get(m + n, (Fraction(0), Fraction(0)))
            out[m + n] = (acc[0] + w[0], acc[1] + w[1])
    return {k: v for k, v in out.items() if v != (0, 0)}


_COS = {1: (Fraction(1, 2), Fraction(0)), -1: (Fraction(1, 2), Fraction(0))}
_SIN = {1: (Fraction(0), Fraction(-1, 2)), -1: (Fraction(0), Fraction(1, 2))}


@lru_cache(maxsize=None)
def _trig(a: int, b: int):
    p = {0: (Fraction(1), Fraction(0))}
    for _ in range(a):
        p = _polymul(p, _COS)
    for _ in range(b):
        p = _polymul(p, _SIN)
    return tuple(sorted(p.items()))


@lru_cache(maxsize=None)
def bessel_weights(m: MonomialSpec) -> tuple[tuple[int, Fraction], ...]:
    """Exact weights w_n with  <mono> = sum_n w_n <r1^(a+b) r2^(c+d) I_n/I_0>.

    Only equal harmonics of the two modes survive the angular integral,
    because the density depends on the angles through theta1 + theta2 only.
    """
    u = dict(_trig(m.a, m.b))
    v = dict(_trig(m.c, m.d))
    acc: dict[int, tuple[Fraction, Fraction]] = {}
    for k, cu in u.items():
        if k in v:
            w = _cmul(cu, v[k])
            prev = acc.get(abs(k), (Fraction(0), Fraction(0)))
            acc[abs(k)] = (prev[0] + w[0], prev[1] + w[1])
    out = []
    for n in sorted(acc):
        re, im = acc[n]
        assert im == 0, "moment weights must be real"
        if re != 0:
            out.append((n, re))
    return tuple(out)


def is_exact_zero(m: MonomialSpec) -> bool:
    return m.degree % 2 == 1 or not bessel_weights(m)


def moments(field: WignerField, monos, rtol: float = DEFAULT_RTOL,
            max_degree: int = MAX_DEGREE) -> tuple[list[float], list[float]]:
    """Batch version of :func:`moment`; one quadrature pass for all monomials."""
    if not isinstance(field, WignerField) or not math.isfinite(field.log_norm):
        raise ValueError("moments need a normalized WignerField")
    monos = list(monos)
    for m in monos:
        if m.degree > max_degree:
            raise DegreeError(f"degree {m.degree} exceeds maximum {max_degree}")
    specs = {RadialSpec(0, 0, 0)}
    for m in monos:
        if not is_exact_zero(m):
            for n, _ in bessel_weights(m):
                specs.add(RadialSpec(m.a + m.b, m.c + m.d, n))
    specs = sorted(specs, key=lambda sp: (sp.p, sp.q, sp.n))
    vals, errs, _ = radial_integrals(field.params, field.convention, specs, rtol)
    idx = {sp: i for i, sp in enumerate(specs)}
    z0 = vals[idx[RadialSpec(0, 0, 0)]]
    e0 = errs[idx[RadialSpec(0, 0, 0)]] / z0
    values, errors = [], []
    for m in monos:
        if is_exact_zero(m):
            values.append(0.0)
            errors.append(0.0)
            continue
        tot = 0.0
        err = 0.0
        for n, w in bessel_weights(m):
            i = idx[RadialSpec(m.a + m.b, m.c + m.d, n)]
            ratio = vals[i] / z0
            tot += float(w) * ratio
            err += abs(float(w)) * (errs[i] / z0 + abs(ratio) * e0)
        values.append(float(tot))
        errors.append(float(err))
    return values, errors


def moment(field: WignerField, m: MonomialSpec, rtol: float = DEFAULT_RTOL) -> tuple[float, float]:
    """``(value, error)`` of <x1^a y1^b x2^c y2^d> under the normalized field."""
    vals, errs = moments(field, [m], rtol)
    return vals[0], errs[0]


_SECOND = [MonomialSpec(2, 0, 0, 0), MonomialSpec(0, 0, 2, 0), MonomialSpec(1, 0, 1, 0),
           MonomialSpec(0, 2, 0, 0), MonomialSpec(0, 0, 0, 2), MonomialSpec(0, 1, 0, 1)]


def epr_variances_from_wigner(field: WignerField, rtol: float = DEFAULT_RTOL) -> EprVariances:
    vals, errs = moments(field, _SECOND, rtol)
    x11, x22, x12, y11, y22, y12 = (float(v) for v in vals)
    err = float(max(errs))
    return EprVariances(
        v_x_plus=0.5 * (x11 + x22 + 2 * x12),
        v_y_plus=0.5 * (y11 + y22 + 2 * y12),
        v_x_minus=0.5 * (x11 + x22 - 2 * x12),
        v_y_minus=0.5 * (y11 + y22 - 2 * y12),
        source=Source.QUADRATURE,
        error=2.0 * err,
    )


# ---------------------------------------------------------------------------
# sweep tables


@dataclass
class VarianceRow:
    mu: float
    source: str
    vxp: object
    vxm: object
    vyp: object
    vym: object
    err: float = 0.0

    @classmethod
    def from_variances(cls, mu: float, v: EprVariances, tag: str | None = None) -> "VarianceRow":
        return cls(mu, tag or v.source.value, v.v_x_plus, v.v_x_minus, v.v_y_plus,
                   v.v_y_minus, v.error)

    def cells(self) -> list:
        return [self.mu, self.source, self.vxp, self.vxm, self.vyp, self.vym, self.err]


@dataclass
class VarianceTable:
    rows: list[VarianceRow] = dc_field(default_factory=list)

    HEADER = ["mu", "source", "vxp", "vxm", "vyp", "vym", "err"]

    def add(self, row: VarianceRow) -> None:
        self.rows.append(row)

    def sort(self) -> None:
        # stable: insertion order breaks ties between sources at equal mu
        self.rows.sort(key=lambda r: r.mu)

    def select(self, source: str) -> list[VarianceRow]:
        return [r for r in self.rows if r.source == source]

    def to_rows(self) -> list[list]:
        return [r.cells() for r in self.rows]


def variance_sweep(mu_grid, g2: float, sources=("linearized", "quadrature"),
                   conventions=(QuarticConvention.APPENDIX_B,),
                   rtol: float = DEFAULT_RTOL, gamma: float = 1.0,
                   gamma0: float = 10.0) -> VarianceTable:
    """Linearized and quadrature EPR variances for every mu in ``mu_grid``.

    Quadrature rows are tagged ``quadrature`` for the default convention and
    ``quadrature:<convention>`` when more than one convention is requested.
    """
    mus = [float(m) for m in mu_grid]
    if any(not math.isfinite(m) for m in mus):
        raise ValueError("mu grid must be finite")
    if mus != sorted(mus):
        raise ValueError("mu grid must be ascending")
    conventions = [QuarticConvention.parse(c) for c in conventions]
    table = VarianceTable()
    for mu in mus:
        if "linearized" in sources:
            v = linearized.linearized_variances(mu, g2)
            table.add(VarianceRow.from_variances(mu, v))
        if "quadrature" in sources:
            for conv in conventions:
                f = normalize(OpoParams(mu=mu, g2=g2, gamma=gamma, gamma0=gamma0), conv, rtol)
                v = epr_variances_from_wigner(f, rtol)
                tag = "quadrature" if len(conventions) == 1 else f"quadrature:{conv.value}"
                table.add(VarianceRow.from_variances(mu, v, tag))
    table.sort()
    return table


__all__ = ["DIV", "MonomialSpec", "VarianceRow", "VarianceTable", "bessel_weights",
           "epr_variances_from_wigner", "is_exact_zero", "moment", "moments",
           "variance_sweep"]
