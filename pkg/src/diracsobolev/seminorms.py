"""Seminorms built from first-order symbols, decompositions and term lists.

Every seminorm here is an L^p quantity on the grid.  For p other than 1 the
pieces are combined as (sum of p-th powers)^(1/p); at p = 1 this is the
plain sum of L^1 norms.

A *term* is a list of (component, coefficients) pairs standing for
sum over pairs of sum_j coefficients[j] d_j f_component.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import clifford as cl
from . import grid as fg
from .grid import VectorField

I = 1j
# derivative combinations, coefficients of d_1..d_4
D12P = (1, I, 0, 0)     # d1 + i d2
D12M = (1, -I, 0, 0)    # d1 - i d2
D34P = (0, 0, 1, I)     # d3 + i d4
D34M = (0, 0, 1, -I)    # d3 - i d4
D3 = (0, 0, 1, 0)
D1 = (1, 0, 0, 0)
D2 = (0, 1, 0, 0)


def _neg(c):
    return tuple(-x for x in c)


# kind -> (dim, m, terms); components are 0-based
_TERMS: dict[str, tuple[int, int, list]] = {
    "m_canonical_alpha": (3, 4, [
        [(0, D12P)], [(0, D3)], [(1, D12M)], [(1, D3)],
        [(2, D12P)], [(2, D3)], [(3, D12M)], [(3, D3)]]),
    "m_sigma3d": (3, 2, [[(0, D12P)], [(0, D3)], [(1, D12M)], [(1, D3)]]),
    "m_cr3d": (3, 1, [[(0, D12M)], [(0, D3)]]),
    "cauchy_riemann": (2, 1, [[(0, D12P)]]),
    "m_canonical_beta": (4, 4, [
        [(0, D12P)], [(0, D34P)], [(1, D12M)], [(1, D34M)],
        [(2, D12P)], [(2, D34M)], [(3, D12M)], [(3, D34P)]]),
    "m4": (4, 4, [
        [(0, D12P), (1, _neg(D34M))], [(1, D12M), (0, D34P)],
        [(2, D12P), (3, _neg(D34P))], [(3, D12M), (2, D34M)]]),
    "m5": (4, 4, [
        [(0, D12P)], [(0, D34P)], [(1, D12M)], [(1, D34M)],
        [(2, D12P), (3, _neg(D34P))], [(3, D12M), (2, D34M)]]),
    "m6": (4, 4, [
        [(0, D12P)], [(0, D34P)], [(1, D12M)], [(1, D34M)],
        [(2, D12P)], [(3, D34P)], [(3, D12M), (2, D34M)]]),
}

_WEYL = {"weyl2d_a": "a", "weyl2d_b": "b", "weyl2d_c": "c"}

KINDS = ("grad", "dirac_full", "m_decomposition", *_TERMS, *_WEYL)

# family -> (dim, m, canonical kind)
_FAMILIES = {"alpha": (3, 4, "m_canonical_alpha"), "beta": (4, 4, "m_canonical_beta"),
             "sigma3d": (3, 2, "m_sigma3d")}


def _check_shape(f: VectorField, dim: int, m: int, what: str):
    if (f.spec.dim, f.spec.m) != (dim, m):
        raise ValueError(f"{what} needs dim={dim}, m={m}; field has dim={f.spec.dim}, m={f.spec.m}")


def _pth(values: np.ndarray, p: float, cell: float) -> float:
    return fg.lp_power(values, p, cell)


def term_values(f: VectorField, terms: Sequence) -> list[np.ndarray]:
    """Evaluate each term on the grid."""
    n = f.spec.dim
    out = []
    for term in terms:
        acc = 0
        for comp, coeffs in term:
            acc = acc + fg.derivative_combination(f, comp, coeffs[:n])
        out.append(acc)
    return out


def term_norms(f: VectorField, terms: Sequence, p: float) -> list[float]:
    return [_pth(v, p, f.spec.cell) ** (1 / p) for v in term_values(f, terms)]


def _combine(pth_values: Iterable[float], p: float) -> float:
    return float(sum(pth_values)) ** (1 / p)


def grad_seminorm(f: VectorField, p: float) -> float:
    """(sum_j sum_k ||d_j f_k||_p^p)^(1/p)."""
    return _combine((_pth(fg.partial_derivative(f, j).samples, p, f.spec.cell)
                     for j in range(1, f.spec.dim + 1)), p)


def operator_seminorm(symbol, f: VectorField, p: float) -> float:
    return fg.lp_norm(fg.apply_symbol(symbol, f), p)


def m_seminorm(d: cl.Decomposition, f: VectorField, p: float) -> float:
    """[||S_1 f||_p^p + ||S_2 f||_p^p]^(1/p) for the split S = S_1 + S_2."""
    return _combine((_pth(fg.apply_symbol(d.part(w), f).samples, p, f.spec.cell) for w in (1, 2)), p)


def canonical_m(kind: str, f: VectorField, p: float) -> float:
    """Seminorm from a fixed list of derivative terms."""
    if kind in _WEYL:
        _check_shape(f, 2, 2, kind)
        return operator_seminorm(cl.weyl2d_symbol(_WEYL[kind]), f, p)
    if kind not in _TERMS:
        raise ValueError(f"unknown term-list seminorm {kind!r}")
    dim, m, terms = _TERMS[kind]
    _check_shape(f, dim, m, kind)
    return _combine((_pth(v, p, f.spec.cell) for v in term_values(f, terms)), p)


def kind_terms(kind: str) -> tuple[int, int, list]:
    return _TERMS[kind]


def seminorm(kind: str, f: VectorField, p: float, decomposition: cl.Decomposition | None = None) -> float:
    if kind == "grad":
        return grad_seminorm(f, p)
    if kind == "dirac_full":
        return operator_seminorm(cl.dirac_symbol_for(f.spec.dim, f.spec.m), f, p)
    if kind == "m_decomposition":
        if decomposition is None:
            raise ValueError("m_decomposition needs a decomposition")
        return m_seminorm(decomposition, f, p)
    return canonical_m(kind, f, p)


@dataclass(frozen=True)
class SandwichResult:
    family: str
    p: float
    dirac: float
    m: float
    grad: float
    lower_margin: float   # M - 2^{-(1-1/p)} ||Df||
    upper_margin: float   # 2^{1-1/p} ||grad f|| - M
    dirac_margin: float | None  # 3^{1-1/p} ||grad f|| - ||Df||, alpha only
    slack: float

    @property
    def ok(self) -> bool:
        ms = [self.lower_margin, self.upper_margin]
        if self.dirac_margin is not None:
            ms.append(self.dirac_margin)
        return min(ms) >= -self.slack


def sandwich_check(f: VectorField, p: float, family: str = "alpha") -> SandwichResult:
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    dim, m, kind = _FAMILIES[family]
    _check_shape(f, dim, m, family)
    d = operator_seminorm(cl.dirac_symbol_for(dim, m), f, p)
    mm = canonical_m(kind, f, p)
    g = grad_seminorm(f, p)
    e = 1 - 1 / p
    dm = 3 ** e * g - d if family == "alpha" else None
    slack = 1e-9 * max(d, mm, g)
    return SandwichResult(family, p, d, mm, g, mm - 2 ** (-e) * d, 2 ** e * g - mm, dm, slack)


@dataclass(frozen=True)
class ChainResult:
    dirac: float
    m4: float
    m5: float
    m6: float
    m_beta: float
    grad: float
    slack: float

    @property
    def values(self) -> tuple[float, ...]:
        return (self.dirac, self.m4, self.m5, self.m6, self.m_beta, self.grad)

    @property
    def margins(self) -> tuple[float, ...]:
        v = self.values
        return (self.slack - abs(v[1] - v[0]),) + tuple(v[i + 1] - v[i] for i in range(1, 5))

    @property
    def ordered(self) -> bool:
        return self.margins[0] >= 0 and min(self.margins[1:]) >= -self.slack


def chain_check_p1(f: VectorField) -> ChainResult:
    """||(beta.p) f||_1 = M4 <= M5 <= M6 <= M_beta <= ||grad f||_1."""
    _check_shape(f, 4, 4, "chain check")
    v = (operator_seminorm(cl.dirac_beta_symbol(), f, 1.0), canonical_m("m4", f, 1.0),
         canonical_m("m5", f, 1.0), canonical_m("m6", f, 1.0),
         canonical_m("m_canonical_beta", f, 1.0), grad_seminorm(f, 1.0))
    return ChainResult(*v, slack=1e-9 * max(v))


@dataclass(frozen=True)
class ProbeStats:
    p: float
    values: tuple[float, ...] = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def min(self) -> float:
        return min(self.values) if self.values else float("nan")

    @property
    def max(self) -> float:
        return max(self.values) if self.values else float("nan")


def equivalence_probe(fields: Sequence[VectorField], p: float) -> ProbeStats:
    """Ratios of the gradient seminorm to a first-order operator.

    Scalar 2-d fields use (||d1 psi|| + ||d2 psi||) / ||(d1 - i d2) psi||;
    fields with a Dirac symbol use ||grad f|| / ||D f||.  Fields where the
    denominator vanishes are skipped.
    """
    vals = []
    for f in fields:
        if (f.spec.dim, f.spec.m) == (2, 1):
            num = sum(fg.lp_norm(fg.partial_derivative(f, j), p) for j in (1, 2))
            den = term_norms(f, [[(0, D12M)]], p)[0]
        else:
            num = grad_seminorm(f, p)
            den = operator_seminorm(cl.dirac_symbol_for(f.spec.dim, f.spec.m), f, p)
        if den > 0:
            vals.append(num / den)
    return ProbeStats(p, tuple(vals))


_CSV_FIELDS = ["record", "field_id", "kind", "p", "value", "margin_lower", "margin_upper",
               "margin_dirac", "slack"]


def seminorm_table(fields: dict, kinds: Sequence[str], ps: Sequence[float]) -> list[dict]:
    rows = []
    for fid, f in fields.items():
        for kind in kinds:
            for p in ps:
                rows.append({"record": "value", "field_id": fid, "kind": kind, "p": p,
                             "value": seminorm(kind, f, p)})
    return rows


def sandwich_rows(fields: dict, ps: Sequence[float], family: str) -> list[dict]:
    rows = []
    for fid, f in fields.items():
        for p in ps:
            r = sandwich_check(f, p, family)
            rows.append({"record": "check", "field_id": fid, "kind": f"sandwich_{family}", "p": p,
                         "value": r.m, "margin_lower": r.lower_margin, "margin_upper": r.upper_margin,
                         "margin_dirac": "" if r.dirac_margin is None else r.dirac_margin,
                         "slack": r.slack})
    return rows


def chain_rows(fields: dict) -> list[dict]:
    rows = []
    for fid, f in fields.items():
        c = chain_check_p1(f)
        ms = c.margins
        rows.append({"record": "check", "field_id": fid, "kind": "chain_beta", "p": 1.0,
                     "value": c.m5, "margin_lower": min(ms[1:]), "margin_upper": ms[0],
                     "margin_dirac": "", "slack": c.slack})
    return rows


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating, int)) and not isinstance(v, bool) else str(v)


def write_seminorm_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=_CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k, "")) if r.get(k, "") != "" else "" for k in _CSV_FIELDS})
