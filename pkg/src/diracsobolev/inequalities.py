"""Ratio probes for improved Sobolev type inequalities and the identities behind them.

A ratio probe evaluates

    ||f||_q / (S(f)^(p/q) * ||f||_B^(1 - p/q)),     B = Besov index p/(p-q) < 0,

for a first-order seminorm S.  Ensemble maxima of these ratios are empirical
constants for the chosen ensemble only.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import counterexample as ce
from . import grid as fg
from . import seminorms as sn
from .errors import ConvergenceError
from .grid import VectorField

# Besov sup window for probes on the torus: t up to (L/8)^2, see besov_window
BESOV_WINDOW_FRACTION = 1 / 8

DEFAULT_M_KIND = {(3, 4): "m_canonical_alpha", (4, 4): "m_canonical_beta", (3, 2): "m_sigma3d",
                  (3, 1): "m_cr3d", (2, 1): "cauchy_riemann"}


def _check_pq(p: float, q: float):
    if not (1 <= p < q < math.inf):
        raise ValueError(f"need 1 <= p < q < inf, got p={p}, q={q}")


def besov_window(spec: fg.GridSpec) -> tuple[float, float]:
    """Heat-time window for Besov estimates of localized fields on the torus."""
    return spec.spacing ** 2 / 4, (spec.L * BESOV_WINDOW_FRACTION) ** 2


def default_m_kind(f: VectorField) -> str:
    try:
        return DEFAULT_M_KIND[(f.spec.dim, f.spec.m)]
    except KeyError:
        raise ValueError(f"no term-list seminorm for dim={f.spec.dim}, m={f.spec.m}") from None


@dataclass(frozen=True)
class RatioProbe:
    kind: str
    p: float
    q: float
    besov_index: float
    numerator: float
    seminorm: float
    besov: float
    flags: tuple[str, ...] = ()

    @property
    def denominator(self) -> float:
        return self.seminorm ** (self.p / self.q) * self.besov ** (1 - self.p / self.q)

    @property
    def degenerate(self) -> bool:
        return "degenerate" in self.flags

    @property
    def ratio(self) -> float:
        return float("nan") if self.degenerate else self.numerator / self.denominator


def _probe(f: VectorField, p: float, q: float, kind: str, numerator: float, n_t: int,
           t_window: tuple[float, float] | None) -> RatioProbe:
    _check_pq(p, q)
    a = p / (p - q)
    s = sn.seminorm(kind, f, p)
    lo, hi = besov_window(f.spec) if t_window is None else t_window
    est = fg.besov_norm(f, a, lo, hi, n_t=n_t, warn=False)
    flags = []
    if est.at_boundary:
        flags.append("besov_edge")
    if s == 0 or est.value == 0:
        flags.append("degenerate")
    return RatioProbe(kind, p, q, a, numerator, s, est.value, tuple(flags))


def ratio_improved(f: VectorField, p: float, q: float, kind: str = "dirac_full", n_t: int = 100,
                   t_window: tuple[float, float] | None = None) -> RatioProbe:
    """Strong-type ratio with ||f||_q in the numerator."""
    _check_pq(p, q)
    return _probe(f, p, q, kind, fg.lp_norm(f, q), n_t, t_window)


def ratio_weak(f: VectorField, p: float, q: float, kind: str = "dirac_full", n_t: int = 100,
               t_window: tuple[float, float] | None = None) -> RatioProbe:
    """Weak-type ratio with ||f||_{q,inf} in the numerator."""
    _check_pq(p, q)
    return _probe(f, p, q, kind, fg.weak_lq_norm(f, q), n_t, t_window)


def gn_compatible(p: float, q: float, r: float, n: int, tol: float = 1e-12) -> bool:
    return abs(1 / q - (1 / p - r / (q * n))) <= tol


def ratio_gn(f: VectorField, p: float, q: float, r: float) -> float:
    """||f||_q / (||grad f||_p^(p/q) ||f||_r^(1-p/q)); nan when the denominator vanishes."""
    _check_pq(p, q)
    if not gn_compatible(p, q, r, f.spec.dim):
        raise ValueError(f"(p, q, r, n) = ({p}, {q}, {r}, {f.spec.dim}) violates 1/q = 1/p - r/(qn)")
    den = sn.grad_seminorm(f, p) ** (p / q) * fg.lp_norm(f, r) ** (1 - p / q)
    return float("nan") if den == 0 else fg.lp_norm(f, q) / den


def ratio_sweep(fields: dict, p: float, q: float, kinds: Sequence[str], weak: bool = False,
                n_t: int = 100) -> list[tuple[str, RatioProbe]]:
    """Probes for every (field_id, kind), ordered by field id then kind."""
    probe = ratio_weak if weak else ratio_improved
    return [(fid, probe(fields[fid], p, q, kind, n_t=n_t)) for fid in sorted(fields) for kind in kinds]


def empirical_constant(probes: Sequence[RatioProbe]) -> float:
    vals = [pr.ratio for pr in probes if not pr.degenerate]
    return max(vals) if vals else float("nan")


# ---------------------------------------------------------------- truncation

@dataclass(frozen=True)
class TruncationParams:
    u: float
    c: float = 10.0

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError("truncation level u must be positive")
        if not self.c > 1:
            raise ValueError("layer constant c must exceed 1")


def _real_samples(f: VectorField) -> np.ndarray:
    if np.any(f.samples.imag != 0):
        raise ValueError("truncation is only defined for real-valued components")
    return f.samples.real


def truncate_values(v: np.ndarray, u: float, c: float) -> np.ndarray:
    top = (c - 1) * u
    return np.minimum(np.maximum(v - u, 0.0), top) + np.maximum(np.minimum(v + u, 0.0), -top)


def truncate(f: VectorField, params: TruncationParams) -> VectorField:
    """Two-sided clamp: 0 where |f_k| <= u, +-(c-1)u where |f_k| >= cu, linear in between."""
    return VectorField(f.spec, truncate_values(_real_samples(f), params.u, params.c))


def truncation_bound_check(f: VectorField, params: TruncationParams) -> float:
    """Worst pointwise margin of |f_u,k - f_k| <= u + |f_k| 1{|f_k| > cu}; >= 0 when it holds."""
    v = _real_samples(f)
    a = np.abs(v)
    diff = np.abs(truncate_values(v, params.u, params.c) - v)
    bound = params.u + np.where(a > params.c * params.u, a, 0.0)
    return float(np.min(bound - diff)) if v.size else 0.0


# ---------------------------------------------------------------- level-set identities

@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def rel_err(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return 0.0 if scale == 0 else abs(self.lhs - self.rhs) / scale


@dataclass(frozen=True)
class Lemma41Result(IdentityCheck):
    lhs_refined: float = 0.0
    n_u: int = 0

    @property
    def rel_err_refined(self) -> float:
        scale = max(abs(self.lhs_refined), abs(self.rhs))
        return 0.0 if scale == 0 else abs(self.lhs_refined - self.rhs) / scale

    @property
    def order(self) -> float:
        """Observed convergence order of the u-quadrature under doubling."""
        a, b = self.rel_err, self.rel_err_refined
        return float("inf") if b == 0 else math.log2(a / b) if a > 0 else float("nan")


# values below this fraction of max|f| are treated as round-off when placing u-nodes
U_FLOOR = 1e-12


def _masked_level_integral(mags: list[np.ndarray], weights: list[np.ndarray], c: float, q: float,
                           n_u: int) -> float:
    """q * int M(f_u)^p du/u with M(f_u)^p = sum_k sum_x w_k(x) 1{u <= |f_k(x)| <= cu}."""
    top = max(float(m.max()) for m in mags)
    pos = [m[m > 0] for m in mags]
    low = min((float(m.min()) for m in pos if m.size), default=top)
    lo = max(low, U_FLOOR * top) / c
    s = np.linspace(math.log(lo), math.log(top), n_u)
    u = np.exp(s)
    total = np.zeros(n_u)
    for m, w in zip(mags, weights):
        order = np.argsort(m, kind="stable")
        ms = m[order]
        cw = np.concatenate([[0.0], np.cumsum(w[order])])
        hi_idx = np.searchsorted(ms, c * u, side="right")
        lo_idx = np.searchsorted(ms, u, side="left")
        total += cw[hi_idx] - cw[lo_idx]
    h = s[1] - s[0]
    return q * h * (fg.tree_sum(total) - 0.5 * (total[0] + total[-1]))


def lemma41_check(f: VectorField, p: float, q: float, c: float = 10.0, n_u: int = 400,
                  kind: str | None = None, tol: float = 0.05) -> Lemma41Result:
    """Level-set identity int d(u^q) u^-q M(f_u)^p = q log(c) M(f)^p for a real field.

    M(f_u) is evaluated through the chain rule: on {u <= |f_k| <= cu} the
    derivatives of f_u,k are those of f_k, and they vanish elsewhere.
    Spectral differentiation of the clamped samples would add Gibbs noise
    at the kinks, so the truncated field itself is never differentiated.
    The u-integral is a trapezoid rule in log u with ``n_u`` nodes, repeated
    with 2 n_u nodes as the convergence oracle.
    """
    _check_pq(p, q)
    if not c > 1:
        raise ValueError("layer constant c must exceed 1")
    v = _real_samples(f)
    kind = default_m_kind(f) if kind is None else kind
    dim, m, terms = sn.kind_terms(kind)
    if (dim, m) != (f.spec.dim, f.spec.m):
        raise ValueError(f"{kind} does not match the field shape")
    if any(len(t) != 1 for t in terms):
        raise ValueError(f"{kind} mixes components within a term; the identity needs single-component terms")
    rhs = q * math.log(c) * sn.canonical_m(kind, f, p) ** p
    if not np.any(v):
        return Lemma41Result(0.0, rhs, 0.0, n_u)
    vals = sn.term_values(f, terms)
    mags, weights = [], []
    for k in range(m):
        w = sum((np.abs(val) ** p for (comp, _), val in zip((t[0] for t in terms), vals) if comp == k),
                np.zeros(f.spec.shape[1:]))
        mags.append(np.abs(v[k]).reshape(-1))
        weights.append(w.reshape(-1) * f.spec.cell)
    lhs = _masked_level_integral(mags, weights, c, q, n_u)
    lhs2 = _masked_level_integral(mags, weights, c, q, 2 * n_u)
    change = abs(lhs2 - lhs) / max(abs(lhs2), 1e-300)
    if change > tol:
        raise ConvergenceError(f"u-quadrature changed by {change:.2e} under doubling", lhs2, change)
    return Lemma41Result(lhs, rhs, lhs2, n_u)


def lemma41_order(f: VectorField, p: float, q: float, c: float = 10.0,
                  n_list: Sequence[int] = (50, 100, 200, 400, 800, 1600)) -> tuple[float, list[float]]:
    """Least-squares order of the u-quadrature error over a ladder of node counts.

    With grid samples M(f_u)^p is a step function of u, so the error of a
    single doubling fluctuates; the slope over several doublings is the
    stable summary.  Returns (order, rel_errs).
    """
    errs = [lemma41_check(f, p, q, c, n, tol=math.inf).rel_err for n in n_list]
    ok = [(n, e) for n, e in zip(n_list, errs) if e > 0]
    if len(ok) < 2:
        return float("inf"), errs
    slope = np.polyfit(np.log([n for n, _ in ok]), np.log([e for _, e in ok]), 1)[0]
    return float(-slope), errs


def layer_cake_check(f: VectorField, q: float) -> IdentityCheck:
    """||f||_q^q against int_0^inf |{|f|_q >= u}| d(u^q) summed over sorted magnitudes."""
    if not q > 1:
        raise ValueError("layer-cake check needs q > 1")
    lhs = fg.lp_norm(f, q) ** q
    a = np.sum(np.abs(f.samples) ** q, axis=0).reshape(-1) ** (1 / q)
    a = np.sort(a)[::-1]
    if a.size == 0 or a[0] == 0:
        return IdentityCheck(lhs, 0.0)
    # measure{|f| >= u} = cell * i on (a_(i+1), a_(i)]
    steps = a ** q - np.append(a[1:], 0.0) ** q
    rhs = f.spec.cell * fg.tree_sum(np.arange(1, a.size + 1) * steps)
    return IdentityCheck(lhs, rhs)


# ---------------------------------------------------------------- divergence at p = 1

_DIVERGENCE_KINDS = {"alpha": ("m_canonical_alpha",), "beta": ("m5", "m6", "m_canonical_beta")}


@dataclass
class DivergenceReport:
    family: str
    ns: list[float]
    q: float
    lq: list[float]
    besov: list[float]
    seminorms: dict[str, list[float]]
    ratios: dict[str, list[float]] = field(default_factory=dict)
    fits: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    def increasing(self, kind: str = "dirac") -> bool:
        r = self.ratios[kind]
        return all(a < b for a, b in zip(r, r[1:]))

    def exponent(self, kind: str = "dirac") -> float:
        return self.fits[kind][0]


def divergence_probe(family: str, ns: Sequence[float], kinds: Sequence[str] | None = None,
                     rule: ce.QuadratureRule = ce.QuadratureRule(), tol: float | None = 1e-8) -> DivergenceReport:
    """p = 1 ratios on f_n with quadrature norms and the closed-form Besov upper bound.

    Since the Besov value is an upper bound, each ratio is a lower bound for
    the true ratio.  ``kinds`` adds term-list seminorms as alternative
    denominators; their quadratures are reported without a tolerance.
    """
    fam = ce.get_family(family)
    kinds = _DIVERGENCE_KINDS[family] if kinds is None else tuple(kinds)
    ns = [float(n) for n in ns]
    lq = [ce.lq_norm(family, n, None, rule, tol).value for n in ns]
    besov = [ce.besov_bound(family, n) for n in ns]
    sems = {"dirac": [ce.l1_dirac(family, n, rule, tol).value for n in ns]}
    for kind in kinds:
        sems[kind] = [ce.seminorm_l1(family, n, kind).value for n in ns]
    e = 1 / fam.q
    rep = DivergenceReport(family, ns, fam.q, lq, besov, sems)
    for kind, s in sems.items():
        rep.ratios[kind] = [a / (b ** e * c ** (1 - e)) for a, b, c in zip(lq, s, besov)]
        if len(ns) >= 2:
            rep.fits[kind] = ce.fit_log_power(ns, rep.ratios[kind])
    return rep


# ---------------------------------------------------------------- output

PROBE_COLUMNS = ["probe_id", "family", "kind", "p", "q", "n", "numerator", "denominator_seminorm",
                 "denominator_besov", "ratio", "flags"]


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def probe_rows(probes: Sequence[tuple[str, RatioProbe]], family: str = "") -> list[list[str]]:
    return [[pid, family, pr.kind, _num(pr.p), _num(pr.q), "", _num(pr.numerator), _num(pr.seminorm),
             _num(pr.besov), _num(pr.ratio), ";".join(pr.flags)] for pid, pr in probes]


def divergence_rows(rep: DivergenceReport) -> list[list[str]]:
    rows = []
    for kind, ratios in rep.ratios.items():
        for n, a, s, b, r in zip(rep.ns, rep.lq, rep.seminorms[kind], rep.besov, ratios):
            rows.append([f"{rep.family}-{kind}-n{n:g}", rep.family, kind, _num(1.0), _num(rep.q), _num(n),
                         _num(a), _num(s), _num(b), _num(r), "besov_upper_bound"])
    return rows


def write_probe_csv(rows: Sequence[Sequence[str]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROBE_COLUMNS)
        w.writerows(rows)
