"""Cut-off eigenfunction families and their norms by quadrature.

Two families are supported:

* ``alpha`` (3-d): e(x) = (1+|x|^2)^(-3/2) (1, 0, i x3, i x1 - x2), with
  (alpha.p) e = 3/(1+|x|^2) e.
* ``beta`` (4-d): e(x) = (1+|x|^2)^(-2) (1, 0, i x3 - x4, i x1 - x2), with
  (beta.p) e = 4/(1+|x|^2) e.

The n-th member is f_n = rho_n(|x|) e(x), where rho_n is 1 up to radius n,
0 beyond n+2, and a quintic smoothstep in between.  All integrands used
here are invariant under rotations about the x3 axis (alpha) or under
separate rotations of the (x1, x2) and (x3, x4) planes (beta), so the
integrals reduce to two dimensions.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from . import clifford as cl
from . import grid as fg
from . import seminorms as sn
from .errors import ConvergenceError


@dataclass(frozen=True)
class Family:
    name: str
    dim: int
    decay: float        # e = (1+|x|^2)^(-decay) v(x)
    eigen: float        # (D e) = eigen/(1+|x|^2) e
    q: float            # critical Lebesgue exponent
    besov_index: float  # p/(p-q) at p = 1

    def symbol(self) -> cl.SymbolMatrix:
        return cl.dirac_alpha_symbol() if self.name == "alpha" else cl.dirac_beta_symbol()


FAMILIES = {
    "alpha": Family("alpha", 3, 1.5, 3.0, 1.5, -2.0),
    "beta": Family("beta", 4, 2.0, 4.0, 4.0 / 3.0, -3.0),
}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; expected 'alpha' or 'beta'") from None


def cutoff(n: float, r):
    """rho_n(r) and its derivative; 1 - s((r-n)/2) with s(t) = 6t^5 - 15t^4 + 10t^3."""
    r = np.asarray(r, dtype=float)
    t = np.clip((r - n) / 2.0, 0.0, 1.0)
    rho = 1.0 - t ** 3 * (10 - 15 * t + 6 * t * t)
    drho = -15.0 * t * t * (1 - t) ** 2  # d/dr = s'(t)/2 with s' = 30 t^2 (1-t)^2
    return rho, drho


def _spinor(fam: Family, x: np.ndarray) -> np.ndarray:
    """v(x), shape (..., 4)."""
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    v = np.zeros(x.shape[:-1] + (4,), complex)
    v[..., 0] = 1.0
    v[..., 2] = 1j * x3 if fam.dim == 3 else 1j * x3 - x[..., 3]
    v[..., 3] = 1j * x1 - x2
    return v


def _spinor_gradient(fam: Family) -> np.ndarray:
    """Constant array dv[j, k] = d_j v_k."""
    g = np.zeros((fam.dim, 4), complex)
    g[0, 3] = 1j
    g[1, 3] = -1.0
    g[2, 2] = 1j
    if fam.dim == 4:
        g[3, 2] = -1.0
    return g


def _check_points(fam: Family, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != fam.dim:
        raise ValueError(f"{fam.name} family lives in dimension {fam.dim}")
    return x


def profile(family: str, x) -> np.ndarray:
    """The uncut eigenfunction e(x)."""
    fam = get_family(family)
    x = _check_points(fam, x)
    w = 1.0 + np.sum(x * x, axis=-1)
    return w[..., None] ** (-fam.decay) * _spinor(fam, x)


def profile_jacobian(family: str, x) -> np.ndarray:
    """d_j e_k as an array of shape (..., dim, 4)."""
    fam = get_family(family)
    x = _check_points(fam, x)
    w = 1.0 + np.sum(x * x, axis=-1)
    v = _spinor(fam, x)
    a = -2 * fam.decay * w ** (-fam.decay - 1)
    return (a[..., None, None] * x[..., :, None] * v[..., None, :]
            + w[..., None, None] ** (-fam.decay) * _spinor_gradient(fam))


def field_values(family: str, n: float, x) -> np.ndarray:
    """f_n(x)."""
    x = np.asarray(x, dtype=float)
    rho, _ = cutoff(n, np.linalg.norm(x, axis=-1))
    return rho[..., None] * profile(family, x)


def field_jacobian(family: str, n: float, x) -> np.ndarray:
    """d_j (f_n)_k, shape (..., dim, 4)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    rho, drho = cutoff(n, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(r > 0, drho / r, 0.0)  # drho vanishes near the origin
    e = profile(family, x)
    return (radial[..., None, None] * x[..., :, None] * e[..., None, :]
            + rho[..., None, None] * profile_jacobian(family, x))


def apply_dirac(family: str, jac: np.ndarray) -> np.ndarray:
    """(S f)_r = sum_{c, j} C[r, c, j] (-i) d_j f_c from a Jacobian array."""
    c = get_family(family).symbol().coefficient_array()
    return -1j * np.einsum("rcj,...jc->...r", c, jac)


def dirac_image(family: str, n: float, x) -> np.ndarray:
    """Closed form of (D f_n)(x)."""
    fam = get_family(family)
    x = _check_points(fam, x)
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    w = 1.0 + r2
    rho, drho = cutoff(n, r)
    v = _spinor(fam, x)
    u = -v
    u[..., 0] = r2
    with np.errstate(invalid="ignore", divide="ignore"):
        b = np.where(r > 0, drho / (r * w ** fam.decay), 0.0)
    a = fam.eigen * rho / w ** (fam.decay + 1)
    return a[..., None] * v + b[..., None] * u


def eigen_residual(family: str, x) -> np.ndarray:
    """|(D e)(x) - eigen/(1+|x|^2) e(x)|_inf at each point, D applied through the Jacobian."""
    fam = get_family(family)
    x = _check_points(fam, x)
    lhs = apply_dirac(family, profile_jacobian(family, x))
    rhs = (fam.eigen / (1 + np.sum(x * x, axis=-1)))[..., None] * profile(family, x)
    return np.max(np.abs(lhs - rhs), axis=-1)


def envelope_margins(family: str, x, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise margins of the upper l^inf envelope and the lower l^q envelope.

    alpha: |e|_inf <= (1+|x|^2)^(-1),   |e|_q^q >= (1+|x|^2)^(-q)
    beta:  |e|_inf <= (1+|x|^2)^(-3/2), |e|_q^q >= (1+|x|^2)^(-3q/2)
    Both margins are non-negative when the envelopes hold.
    """
    fam = get_family(family)
    e = profile(family, x)
    w = 1 + np.sum(np.asarray(x) ** 2, axis=-1)
    up = fam.decay - 0.5
    upper = w ** (-up) - np.max(np.abs(e), axis=-1)
    lower = np.sum(np.abs(e) ** q, axis=-1) - w ** (-up * q)
    return upper, lower


# ---------------------------------------------------------------- quadrature

def _gauss(a: float, b: float, panels: int, order: int, geometric: bool = False):
    if b <= a or panels < 1:
        return np.empty(0), np.empty(0)
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.geomspace(a, b, panels + 1) if geometric else np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * t[None, :] + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w[None, :]
    return nodes.reshape(-1), weights.reshape(-1)


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule in (radius, angle)."""
    radial_panels: int = 48
    angular_panels: int = 16
    order: int = 16

    def doubled(self) -> QuadratureRule:
        return QuadratureRule(2 * self.radial_panels, 2 * self.angular_panels, self.order)


def _radial_nodes(n: float, rule: QuadratureRule, extra_breaks: Sequence[float]):
    p = rule.radial_panels
    parts = [_gauss(0.0, min(1.0, n), max(2, p // 8), rule.order)]
    if n > 1:
        parts.append(_gauss(1.0, n, max(4, p // 2), rule.order, geometric=True))
    cut = sorted({n, n + 2.0, *[b for b in extra_breaks if n < b < n + 2]})
    for a, b in zip(cut[:-1], cut[1:]):
        parts.append(_gauss(a, b, max(2, int(np.ceil(p / 4 * (b - a) / 2))), rule.order))
    return np.concatenate([q[0] for q in parts]), np.concatenate([q[1] for q in parts])


def _angular_nodes(fam: Family, rule: QuadratureRule):
    if fam.dim == 3:
        a = _gauss(0.0, np.pi / 2, rule.angular_panels // 2, rule.order)
        b = _gauss(np.pi / 2, np.pi, rule.angular_panels // 2, rule.order)
        return np.concatenate([a[0], b[0]]), np.concatenate([a[1], b[1]])
    return _gauss(0.0, np.pi / 2, rule.angular_panels, rule.order)


def _embed(fam: Family, r: np.ndarray, ang: np.ndarray):
    """Points and volume weights for a tensor grid of radii and angles."""
    R, A = np.meshgrid(r, ang, indexing="ij")
    x = np.zeros(R.shape + (fam.dim,))
    if fam.dim == 3:
        x[..., 0] = R * np.sin(A)
        x[..., 2] = R * np.cos(A)
        jac = 2 * np.pi * R ** 2 * np.sin(A)
    else:
        x[..., 0] = R * np.cos(A)
        x[..., 2] = R * np.sin(A)
        jac = (2 * np.pi) ** 2 * R ** 3 * np.cos(A) * np.sin(A)
    return x, jac


def reduced_integral(family: str, n: float, integrand: Callable[[np.ndarray], np.ndarray],
                     rule: QuadratureRule = QuadratureRule(), extra_breaks: Sequence[float] = (),
                     chunk: int = 256) -> float:
    """Integral over the ball of radius n+2 of a symmetric integrand.

    ``integrand`` maps points of shape (..., dim) to real values of shape (...).
    """
    fam = get_family(family)
    r, wr = _radial_nodes(n, rule, extra_breaks)
    a, wa = _angular_nodes(fam, rule)
    total = 0.0
    for s in range(0, r.size, chunk):
        x, jac = _embed(fam, r[s:s + chunk], a)
        vals = integrand(x) * jac
        total += float(wr[s:s + chunk] @ vals @ wa)
    return total


def _dirac_kinks(family: str, n: float) -> list[float]:
    """Radii in the cutoff shell where the first component of D f_n changes sign."""
    fam = get_family(family)
    def first(r):
        x = np.zeros(fam.dim)
        x[0] = r
        return dirac_image(family, n, x)[0].real
    grid = np.linspace(n, n + 2, 65)
    vals = np.array([first(r) for r in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(optimize.brentq(first, a, b, xtol=1e-14, rtol=1e-15))
    return roots


@dataclass(frozen=True)
class ConvergedValue:
    value: float
    coarse: float
    rel_change: float


def _converged(compute: Callable[[QuadratureRule], float], rule: QuadratureRule, tol: float | None,
               what: str) -> ConvergedValue:
    a = compute(rule)
    b = compute(rule.doubled())
    rel = abs(b - a) / max(abs(b), 1e-300)
    if tol is not None and rel > tol:
        raise ConvergenceError(f"{what}: panel doubling changed the value by {rel:.2e}", b, rel)
    return ConvergedValue(b, a, rel)


def l1_dirac(family: str, n: float, rule: QuadratureRule = QuadratureRule(), tol: float | None = 1e-8) -> ConvergedValue:
    """||D f_n||_1 with the pointwise l^1 norm."""
    kinks = _dirac_kinks(family, n)
    def integrand(x):
        return np.sum(np.abs(dirac_image(family, n, x)), axis=-1)
    return _converged(lambda rr: reduced_integral(family, n, integrand, rr, kinks), rule, tol,
                      f"l1_dirac[{family}, n={n}]")


def lq_norm(family: str, n: float, q: float | None = None, rule: QuadratureRule = QuadratureRule(),
            tol: float | None = 1e-8) -> ConvergedValue:
    """||f_n||_q with the pointwise l^q norm; q defaults to the critical exponent."""
    q = get_family(family).q if q is None else q
    def integrand(x):
        return np.sum(np.abs(field_values(family, n, x)) ** q, axis=-1)
    c = _converged(lambda rr: reduced_integral(family, n, integrand, rr), rule, tol,
                   f"lq_norm[{family}, n={n}]")
    return ConvergedValue(c.value ** (1 / q), c.coarse ** (1 / q), c.rel_change)


def seminorm_l1(family: str, n: float, kind: str, rule: QuadratureRule = QuadratureRule(order=12),
                tol: float | None = None) -> ConvergedValue:
    """A term-list seminorm (p = 1) of f_n from the closed-form Jacobian.

    Some terms vanish along curves in the reduced plane, so these integrals
    converge more slowly than ``l1_dirac``; no tolerance is enforced by default.
    """
    fam = get_family(family)
    dim, m, terms = sn.kind_terms(kind)
    if dim != fam.dim:
        raise ValueError(f"{kind} is not defined for the {family} family")

    def integrand(x):
        jac = field_jacobian(family, n, x)
        acc = 0.0
        for term in terms:
            val = 0
            for comp, coeffs in term:
                val = val + np.tensordot(jac[..., comp], np.asarray(coeffs[:dim]), axes=(-1, 0))
            acc = acc + np.abs(val)
        return acc
    return _converged(lambda rr: reduced_integral(family, n, integrand, rr), rule, tol,
                      f"{kind}[{family}, n={n}]")


# ---------------------------------------------------------------- bounds

def besov_bound(family: str, n: float) -> float:
    """Closed-form upper bound for the critical Besov norm of f_n."""
    m = n + 2.0
    if family == "alpha":
        return max(2.0, 2.0 + np.log1p(m * m)) / (2 * np.sqrt(2 * np.pi * np.e))
    if family == "beta":
        return max(2.0, 2.0 + np.log(m + np.sqrt(1 + m * m))) / (4 * np.pi * np.sqrt(2 * np.e))
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class PaperBounds:
    l1_intermediate: float   # the two radial integrals
    l1_arctan: float         # after bounding the integrands by 2/(1+r^2) and 2
    l1_uniform: float        # n-independent limit
    lq_lower: float          # stated lower bound on ||f_n||_q
    lq_envelope: float       # (integral of the lower envelope over |x| <= n)^(1/q)


def paper_bounds(family: str, n: float) -> PaperBounds:
    m = n + 2.0
    quad = lambda g, a, b: integrate.quad(g, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
    if family == "alpha":
        inter = (quad(lambda r: 3 * (np.sqrt(2) * r + 1) * 4 * np.pi * r * r / (1 + r * r) ** 2.5, 0, m)
                 + quad(lambda r: (r + np.sqrt(2)) * 4 * np.pi * r * r / (1 + r * r) ** 1.5, n, m))
        arct = 24 * np.pi * np.arctan(m) + 16 * np.pi
        unif = 12 * np.pi ** 2 + 16 * np.pi
        lower = (4 * np.pi) ** (2 / 3) * np.log(n) ** (2 / 3)
        env = (4 * np.pi * (np.arcsinh(n) - n / np.sqrt(1 + n * n))) ** (2 / 3)
    elif family == "beta":
        pi2 = np.pi ** 2
        inter = (quad(lambda r: 4 * (1 + np.sqrt(2) * r) * 2 * pi2 * r ** 3 / (1 + r * r) ** 3, 0, m)
                 + quad(lambda r: (r + np.sqrt(2)) * 2 * pi2 * r ** 3 / (1 + r * r) ** 2, n, m))
        arct = 16 * pi2 * np.arctan(m) + 8 * pi2
        unif = 8 * np.pi ** 3 + 8 * pi2
        env = (pi2 * (np.log1p(n * n) - n * n / (1 + n * n))) ** 0.75
        lower = env
    else:
        raise ValueError(f"unknown family {family!r}")
    return PaperBounds(inter, arct, unif, lower, env)


# ---------------------------------------------------------------- grid route

def grid_field(family: str, n: float, N: int, L: float | None = None) -> fg.VectorField:
    """f_n sampled on a periodic box of side L (default 4(n+2))."""
    fam = get_family(family)
    L = 4.0 * (n + 2) if L is None else L
    spec = fg.GridSpec(fam.dim, 4, L, N)
    return fg.sample(lambda x: field_values(family, n, x), spec)


def besov_box(n: float, pad: float = 12.0) -> float:
    """Box side 2(n+2) + pad: the support plus a fixed gap between periodic copies.

    Keeps the grid spacing from growing like 4(n+2)/N when only the heat
    flow up to t ~ (L/8)^2 is needed.
    """
    return 2.0 * (n + 2.0) + pad


def besov_numeric(family: str, n: float, N: int, L: float | None = None, n_t: int = 60,
                  t_max: float | None = None) -> fg.BesovEstimate:
    """Grid estimate of the critical Besov norm of f_n.

    The window stops at t_max (default (L/8)^2): for larger t the periodic
    images and the mean of f_n dominate the heat flow on the torus.
    """
    f = grid_field(family, n, N, L)
    t_max = (f.spec.L / 8) ** 2 if t_max is None else t_max
    return fg.besov_norm(f, get_family(family).besov_index, t_max=t_max, n_t=n_t, warn=False)


# ---------------------------------------------------------------- sweeps

def fit_log_power(ns: Sequence[float], values: Sequence[float]) -> tuple[float, float, float]:
    """Least squares for log v = log A + gamma log log n; returns (gamma, A, rms residual)."""
    x = np.log(np.log(np.asarray(ns, float)))
    y = np.log(np.asarray(values, float))
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return float(coef[0]), float(np.exp(coef[1])), rms


def fit_affine_log(ns: Sequence[float], values: Sequence[float], gamma: float) -> tuple[float, float, float]:
    """Least squares for v = a + b (log n)^gamma; returns (a, b, rms residual)."""
    x = np.log(np.asarray(ns, float)) ** gamma
    y = np.asarray(values, float)
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), rms


@dataclass
class SweepRecord:
    family: str
    n: float
    l1_dirac: float
    l1_rel_change: float
    lq_norm: float
    lq_rel_change: float
    besov_bound: float
    besov_numeric: float | None
    bounds: PaperBounds


@dataclass
class SweepResult:
    family: str
    records: list[SweepRecord]
    fits: dict = field(default_factory=dict)


def sweep(family: str, ns: Sequence[float], rule: QuadratureRule = QuadratureRule(),
          besov_grid: dict | None = None, tol: float | None = 1e-8) -> SweepResult:
    """Norms of f_n over several n with model fits.

    ``besov_grid`` maps n to a grid size N for the optional grid Besov estimate.
    """
    recs = []
    for n in ns:
        l1 = l1_dirac(family, n, rule, tol)
        lq = lq_norm(family, n, None, rule, tol)
        bn = None
        if besov_grid and n in besov_grid:
            bn = besov_numeric(family, n, besov_grid[n]).value
        recs.append(SweepRecord(family, float(n), l1.value, l1.rel_change, lq.value, lq.rel_change,
                                besov_bound(family, n), bn, paper_bounds(family, n)))
    res = SweepResult(family, recs)
    if len(ns) >= 2:
        q = get_family(family).q
        x = [r.n for r in recs]
        l1s = [r.l1_dirac for r in recs]
        slope = np.polyfit(np.log(x), l1s, 1)[0]
        res.fits["l1_dirac"] = ("a + b log n", fit_affine_log(x, l1s, 1.0), float(slope / np.mean(l1s)))
        res.fits["lq_norm"] = (f"a + b (log n)^{1 / q:.4g}", fit_affine_log(x, [r.lq_norm for r in recs], 1 / q))
        res.fits["lq_exponent"] = ("A (log n)^gamma", fit_log_power(x, [r.lq_norm for r in recs]))
        res.fits["besov_bound"] = ("a + b log n", fit_affine_log(x, [r.besov_bound for r in recs], 1.0))
    return res


SWEEP_COLUMNS = ["family", "n", "l1_dirac", "lq_norm", "besov_bound", "besov_numeric",
                 "fit_model", "fit_params", "fit_residual"]


def write_sweep_csv(results: Sequence[SweepResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for res in results:
            for r in res.records:
                w.writerow([r.family, repr(r.n), repr(r.l1_dirac), repr(r.lq_norm), repr(r.besov_bound),
                            "" if r.besov_numeric is None else repr(r.besov_numeric), "", "", ""])
            for name, fit in res.fits.items():
                model, params = fit[0], fit[1]
                w.writerow([res.family, "", "", "", "", "", f"{name}: {model}",
                            " ".join(repr(float(p)) for p in params[:-1]), repr(float(params[-1]))])
