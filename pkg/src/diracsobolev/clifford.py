"""Exact Clifford algebra: Dirac matrices, operator symbols and their splits.

Numbers live in Q(i, sqrt 2) and are held exactly as four rationals, so
anticommutator residuals and conjugation identities are checked with
``==`` and no tolerance.  A symbol matrix is a matrix whose entries are
linear forms in the momenta p_1..p_n; a decomposition is an entrywise
two-way split of such a matrix.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Exact", "ConstMatrix", "SymbolMatrix", "Decomposition", "TermMultiset",
    "pauli", "alpha_matrices", "beta_matrices", "anticommutator_residuals",
    "operator_symbol", "block_symbol", "dirac_alpha_symbol", "dirac_beta_symbol",
    "sigma3d_symbol", "weyl2d_symbol", "enumerate_decompositions", "decom1",
    "conjugators", "conjugate", "induced_norm", "dirac_symbol_for", "PAPER_DECOM_COUNT",
]

# Count of decompositions of the 4x4 Dirac symbols as stated in the source
# text; enumeration gives 2**16 / 2 = 128 unordered splits.
PAPER_DECOM_COUNT = 64


def _sign_qsqrt2(a: Fraction, b: Fraction) -> int:
    """Exact sign of a + b*sqrt(2)."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == 0 or sb == 0 or sa == sb:
        return sa or sb
    # opposite signs: compare a^2 against 2 b^2
    d = a * a - 2 * b * b
    return sa if d > 0 else -sa


@dataclass(frozen=True)
class Exact:
    """(ra + rb*sqrt2) + i*(ia + ib*sqrt2) with rational parts."""
    ra: Fraction = Fraction(0)
    rb: Fraction = Fraction(0)
    ia: Fraction = Fraction(0)
    ib: Fraction = Fraction(0)

    def __init__(self, ra=0, rb=0, ia=0, ib=0):
        object.__setattr__(self, "ra", Fraction(ra))
        object.__setattr__(self, "rb", Fraction(rb))
        object.__setattr__(self, "ia", Fraction(ia))
        object.__setattr__(self, "ib", Fraction(ib))

    @classmethod
    def i(cls) -> Exact:
        return cls(0, 0, 1, 0)

    @classmethod
    def sqrt2_inv(cls) -> Exact:
        return cls(0, Fraction(1, 2))

    @classmethod
    def from_scaled(cls, a: int, b: int, s: int) -> Exact:
        """Value (a + b i) * 2**(-s/2)."""
        if s % 2 == 0:
            f = Fraction(2) ** (-s // 2)
            return cls(a * f, 0, b * f, 0)
        # 2**(-s/2) = 2**(-(s+1)/2) * sqrt2
        f = Fraction(2) ** (-(s + 1) // 2)
        return cls(0, a * f, 0, b * f)

    def to_scaled(self) -> tuple[int, int, int]:
        """Inverse of from_scaled, with the smallest admissible s >= -1."""
        if self.is_zero():
            return 0, 0, 0
        if self.rb == 0 and self.ib == 0:
            re, im, odd = self.ra, self.ia, False
        elif self.ra == 0 and self.ia == 0:
            re, im, odd = self.rb, self.ib, True
        else:
            raise ValueError(f"{self} is not of the form (a+bi)*2^(-s/2)")
        k = 0
        while (re * 2 ** k).denominator != 1 or (im * 2 ** k).denominator != 1:
            k += 1
            if k > 4096:
                raise ValueError(f"{self} has a non-dyadic denominator")
        a, b = int(re * 2 ** k), int(im * 2 ** k)
        # odd case: c*sqrt2 = c * 2**(1/2), so s = 2k - 1
        return (a, b, 2 * k - 1) if odd else (a, b, 2 * k)

    def is_zero(self) -> bool:
        return not (self.ra or self.rb or self.ia or self.ib)

    def __add__(self, o: Exact) -> Exact:
        o = _lift(o)
        return Exact(self.ra + o.ra, self.rb + o.rb, self.ia + o.ia, self.ib + o.ib)

    __radd__ = __add__

    def __neg__(self) -> Exact:
        return Exact(-self.ra, -self.rb, -self.ia, -self.ib)

    def __sub__(self, o: Exact) -> Exact:
        return self + (-_lift(o))

    def __rsub__(self, o) -> Exact:
        return _lift(o) - self

    def __mul__(self, o) -> Exact:
        o = _lift(o)

        def qm(a, b, c, d):  # (a + b r)(c + d r), r = sqrt2
            return a * c + 2 * b * d, a * d + b * c

        rr = qm(self.ra, self.rb, o.ra, o.rb)
        ii = qm(self.ia, self.ib, o.ia, o.ib)
        ri = qm(self.ra, self.rb, o.ia, o.ib)
        ir = qm(self.ia, self.ib, o.ra, o.rb)
        return Exact(rr[0] - ii[0], rr[1] - ii[1], ri[0] + ir[0], ri[1] + ir[1])

    __rmul__ = __mul__

    def conj(self) -> Exact:
        return Exact(self.ra, self.rb, -self.ia, -self.ib)

    def __complex__(self) -> complex:
        r2 = 2 ** 0.5
        return complex(float(self.ra) + float(self.rb) * r2, float(self.ia) + float(self.ib) * r2)

    def re_sign(self) -> int:
        return _sign_qsqrt2(self.ra, self.rb)

    def im_sign(self) -> int:
        return _sign_qsqrt2(self.ia, self.ib)

    def __repr__(self) -> str:
        z = complex(self)
        return f"Exact({z.real:.6g}{z.imag:+.6g}j)"


def _lift(x) -> Exact:
    if isinstance(x, Exact):
        return x
    if isinstance(x, (int, Fraction)):
        return Exact(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact number")


_ZERO = Exact(0)
_UNITS = (Exact(1), Exact.i(), Exact(-1), -Exact.i())


@dataclass(frozen=True)
class ConstMatrix:
    rows: tuple[tuple[Exact, ...], ...]

    @classmethod
    def of(cls, data: Sequence[Sequence]) -> ConstMatrix:
        return cls(tuple(tuple(_lift(v) for v in r) for r in data))

    @classmethod
    def identity(cls, k: int) -> ConstMatrix:
        return cls.of([[1 if i == j else 0 for j in range(k)] for i in range(k)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __matmul__(self, o: ConstMatrix) -> ConstMatrix:
        n, k = self.shape
        k2, m = o.shape
        if k != k2:
            raise ValueError("shape mismatch")
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = _ZERO
                for t in range(k):
                    a, b = self.rows[i][t], o.rows[t][j]
                    if not (a.is_zero() or b.is_zero()):
                        acc = acc + a * b
                row.append(acc)
            out.append(tuple(row))
        return ConstMatrix(tuple(out))

    def __add__(self, o: ConstMatrix) -> ConstMatrix:
        return ConstMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, o.rows)))

    def __sub__(self, o: ConstMatrix) -> ConstMatrix:
        return self + o.scale(-1)

    def scale(self, c) -> ConstMatrix:
        c = _lift(c)
        return ConstMatrix(tuple(tuple(c * a for a in r) for r in self.rows))

    def adjoint(self) -> ConstMatrix:
        n, m = self.shape
        return ConstMatrix(tuple(tuple(self.rows[i][j].conj() for i in range(n)) for j in range(m)))

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def is_identity(self) -> bool:
        return self == ConstMatrix.identity(self.shape[0])

    def to_numpy(self) -> np.ndarray:
        return np.array([[complex(a) for a in r] for r in self.rows])


def pauli() -> tuple[ConstMatrix, ConstMatrix, ConstMatrix]:
    i = Exact.i()
    return (ConstMatrix.of([[0, 1], [1, 0]]),
            ConstMatrix.of([[0, -i], [i, 0]]),
            ConstMatrix.of([[1, 0], [0, -1]]))


def _blocks(b: Sequence[Sequence[ConstMatrix | None]], k: int) -> ConstMatrix:
    z = ConstMatrix.of([[0] * k] * k)
    rows = []
    for brow in b:
        mats = [m if m is not None else z for m in brow]
        for r in range(k):
            rows.append(tuple(itertools.chain.from_iterable(m.rows[r] for m in mats)))
    return ConstMatrix(tuple(rows))


def alpha_matrices() -> list[ConstMatrix]:
    """alpha_j = [[0, sigma_j], [sigma_j, 0]] for j = 1, 2, 3."""
    return [_blocks([[None, s], [s, None]], 2) for s in pauli()]


def beta_matrices() -> list[ConstMatrix]:
    """alpha_1..alpha_3 plus [[0, -i I], [i I, 0]]."""
    i2 = ConstMatrix.identity(2)
    b4 = _blocks([[None, i2.scale(-Exact.i())], [i2.scale(Exact.i()), None]], 2)
    return alpha_matrices() + [b4]


def anticommutator_residuals(mats: Sequence[ConstMatrix]) -> dict[tuple[int, int], ConstMatrix]:
    """{M_j, M_k} - 2 delta_jk I for every ordered pair (0-based keys)."""
    k = mats[0].shape[0]
    eye2 = ConstMatrix.identity(k).scale(2)
    out = {}
    for a, b in itertools.product(range(len(mats)), repeat=2):
        r = mats[a] @ mats[b] + mats[b] @ mats[a]
        if a == b:
            r = r - eye2
        out[(a, b)] = r
    return out


Entry = tuple  # tuple of Exact coefficients, one per momentum p_1..p_n


def _entry_is_zero(e: Entry) -> bool:
    return all(c.is_zero() for c in e)


def _entry_str(e: Entry) -> str:
    parts = []
    for j, c in enumerate(e, start=1):
        if c.is_zero():
            continue
        z = complex(c)
        parts.append(f"({z.real:g}{z.imag:+g}i)p{j}")
    return " + ".join(parts) or "0"


@dataclass(frozen=True)
class SymbolMatrix:
    """Matrix of linear forms; entry (r, c) is sum_j coef[j] * p_{j+1}."""
    dim: int
    entries: tuple[tuple[Entry, ...], ...]

    @classmethod
    def zeros(cls, dim: int, rows: int, cols: int) -> SymbolMatrix:
        z = tuple([_ZERO] * dim)
        return cls(dim, tuple(tuple(z for _ in range(cols)) for _ in range(rows)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def nonzero_positions(self) -> list[tuple[int, int]]:
        """Row-major list of (row, col) with a nonzero entry (0-based)."""
        n, m = self.shape
        return [(r, c) for r in range(n) for c in range(m) if not _entry_is_zero(self.entries[r][c])]

    def restrict(self, keep: Iterable[tuple[int, int]]) -> SymbolMatrix:
        keep = set(keep)
        z = tuple([_ZERO] * self.dim)
        n, m = self.shape
        return SymbolMatrix(self.dim, tuple(
            tuple(self.entries[r][c] if (r, c) in keep else z for c in range(m)) for r in range(n)))

    def columns(self, cols: Iterable[int]) -> SymbolMatrix:
        """S times the coordinate projection onto the given 1-based columns."""
        cols = {c - 1 for c in cols}
        n, m = self.shape
        return self.restrict((r, c) for r in range(n) for c in range(m) if c in cols)

    def __add__(self, o: SymbolMatrix) -> SymbolMatrix:
        if self.dim != o.dim or self.shape != o.shape:
            raise ValueError("shape mismatch")
        return SymbolMatrix(self.dim, tuple(
            tuple(tuple(a + b for a, b in zip(x, y)) for x, y in zip(r, s))
            for r, s in zip(self.entries, o.entries)))

    def is_zero(self) -> bool:
        return not self.nonzero_positions()

    def left(self, u: ConstMatrix) -> SymbolMatrix:
        n, m = self.shape
        out = []
        for i in range(u.shape[0]):
            row = []
            for c in range(m):
                acc = [_ZERO] * self.dim
                for t in range(n):
                    a = u.rows[i][t]
                    if a.is_zero():
                        continue
                    acc = [x + a * y for x, y in zip(acc, self.entries[t][c])]
                row.append(tuple(acc))
            out.append(tuple(row))
        return SymbolMatrix(self.dim, tuple(out))

    def right(self, u: ConstMatrix) -> SymbolMatrix:
        n, m = self.shape
        out = []
        for r in range(n):
            row = []
            for j in range(u.shape[1]):
                acc = [_ZERO] * self.dim
                for t in range(m):
                    a = u.rows[t][j]
                    if a.is_zero():
                        continue
                    acc = [x + y * a for x, y in zip(acc, self.entries[r][t])]
                row.append(tuple(acc))
            out.append(tuple(row))
        return SymbolMatrix(self.dim, tuple(out))

    def coefficient_array(self) -> np.ndarray:
        """Complex array C[row, col, j] with S(p) = C @ p."""
        return np.array([[[complex(c) for c in e] for e in r] for r in self.entries])

    def __str__(self) -> str:
        return "\n".join(" | ".join(_entry_str(e) for e in r) for r in self.entries)


def operator_symbol(mats: Sequence[ConstMatrix], indices: Sequence[int] | None = None,
                    dim: int | None = None) -> SymbolMatrix:
    """sum_j mats[j] p_{indices[j]} (1-based momentum indices)."""
    indices = list(indices) if indices is not None else list(range(1, len(mats) + 1))
    dim = dim if dim is not None else max(indices)
    n, m = mats[0].shape
    rows = []
    for r in range(n):
        row = []
        for c in range(m):
            e = [_ZERO] * dim
            for mat, j in zip(mats, indices):
                e[j - 1] = e[j - 1] + mat.rows[r][c]
            row.append(tuple(e))
        rows.append(tuple(row))
    return SymbolMatrix(dim, tuple(rows))


def block_symbol(blocks: Sequence[Sequence[SymbolMatrix | None]]) -> SymbolMatrix:
    """Assemble a block symbol matrix; None marks a zero block."""
    ref = next(b for row in blocks for b in row if b is not None)
    k, _ = ref.shape
    z = SymbolMatrix.zeros(ref.dim, k, k)
    rows = []
    for brow in blocks:
        mats = [b if b is not None else z for b in brow]
        for r in range(k):
            rows.append(tuple(itertools.chain.from_iterable(m.entries[r] for m in mats)))
    return SymbolMatrix(ref.dim, tuple(rows))


def dirac_alpha_symbol() -> SymbolMatrix:
    return operator_symbol(alpha_matrices())


def dirac_beta_symbol() -> SymbolMatrix:
    return operator_symbol(beta_matrices())


def sigma3d_symbol() -> SymbolMatrix:
    return operator_symbol(pauli())


def weyl2d_symbol(variant: str) -> SymbolMatrix:
    """Two-dimensional Weyl symbols: a = s1 p1 + s2 p2, b = s3 p1 + s1 p2, c = s3 p1 + s2 p2."""
    s1, s2, s3 = pauli()
    pick = {"a": (s1, s2), "b": (s3, s1), "c": (s3, s2)}
    if variant not in pick:
        raise ValueError(f"unknown Weyl variant {variant!r}")
    return operator_symbol(pick[variant], dim=2)


def normalize_phase(e: Entry) -> Entry:
    """Rotate by a unit in {1, i, -1, -i} so the first nonzero coefficient has re > 0, im >= 0."""
    first = next((c for c in e if not c.is_zero()), None)
    if first is None:
        return e
    for u in _UNITS:
        z = u * first
        if z.re_sign() > 0 and z.im_sign() >= 0:
            return tuple(u * c for c in e)
    raise AssertionError("unreachable")  # one of the four rotations always lands in the quadrant


def _entry_key(e: Entry):
    return tuple((c.ra, c.rb, c.ia, c.ib) for c in e)


@dataclass(frozen=True)
class TermMultiset:
    """Sorted (component, phase-normalized entry) pairs, components 1-based."""
    terms: tuple

    def counts(self) -> Counter:
        return Counter(self.terms)


@dataclass(frozen=True, eq=False)
class Decomposition:
    base: SymbolMatrix
    labels: tuple[int, ...]  # 1 or 2 per nonzero entry of base, row-major

    def __post_init__(self):
        pos = self.base.nonzero_positions()
        if len(self.labels) != len(pos) or any(l not in (1, 2) for l in self.labels):
            raise ValueError("labels must assign 1 or 2 to every nonzero entry")
        if self.labels and self.labels[0] != 1:
            object.__setattr__(self, "labels", tuple(3 - l for l in self.labels))

    def __eq__(self, o) -> bool:
        return isinstance(o, Decomposition) and self.base == o.base and self.labels == o.labels

    def __hash__(self) -> int:
        return hash((self.base, self.labels))

    @classmethod
    def trivial(cls, base: SymbolMatrix) -> Decomposition:
        return cls(base, tuple([1] * len(base.nonzero_positions())))

    @classmethod
    def from_parts(cls, base: SymbolMatrix, part1: SymbolMatrix) -> Decomposition:
        """Recover the assignment from the first part; the split must be entrywise."""
        labels = []
        for r, c in base.nonzero_positions():
            e1 = part1.entries[r][c]
            if _entry_is_zero(e1):
                labels.append(2)
            elif e1 == base.entries[r][c]:
                labels.append(1)
            else:
                raise ValueError(f"entry {(r + 1, c + 1)} is not split entrywise")
        if set(part1.nonzero_positions()) - set(base.nonzero_positions()):
            raise ValueError("first part has entries outside the base support")
        return cls(base, tuple(labels))

    def part(self, which: int) -> SymbolMatrix:
        pos = self.base.nonzero_positions()
        return self.base.restrict(p for p, l in zip(pos, self.labels) if l == which)

    def row_condition(self) -> bool:
        """Every nonzero row of each part holds exactly one nonzero entry."""
        for w in (1, 2):
            per_row = Counter(r for r, _ in self.part(w).nonzero_positions())
            if any(v != 1 for v in per_row.values()):
                return False
        return True

    def canonical_terms(self) -> TermMultiset:
        terms = []
        for w in (1, 2):
            part = self.part(w)
            for r, c in part.nonzero_positions():
                terms.append((c + 1, normalize_phase(part.entries[r][c])))
        terms.sort(key=lambda t: (t[0], _entry_key(t[1])))
        return TermMultiset(tuple(terms))

    def to_json(self) -> dict:
        def coefs(e):
            return [[j + 1, *c.to_scaled()] for j, c in enumerate(e) if not c.is_zero()]

        base = [[r + 1, c + 1, coefs(self.base.entries[r][c])] for r, c in self.base.nonzero_positions()]
        terms = [[col, coefs(e)] for col, e in self.canonical_terms().terms]
        return {"dim": self.base.dim, "shape": list(self.base.shape), "base": base,
                "assignment": list(self.labels), "row_condition": self.row_condition(),
                "terms": terms}

    @classmethod
    def from_json(cls, d: dict) -> Decomposition:
        dim = d["dim"]
        rows, cols = d["shape"]
        grid = [[[_ZERO] * dim for _ in range(cols)] for _ in range(rows)]
        for r, c, cs in d["base"]:
            for j, a, b, s in cs:
                grid[r - 1][c - 1][j - 1] = Exact.from_scaled(a, b, s)
        base = SymbolMatrix(dim, tuple(tuple(tuple(e) for e in row) for row in grid))
        return cls(base, tuple(d["assignment"]))


def enumerate_decompositions(base: SymbolMatrix) -> list[Decomposition]:
    """All unordered entrywise splits, first nonzero entry pinned to part 1."""
    k = len(base.nonzero_positions())
    if k == 0:
        return [Decomposition(base, ())]
    return [Decomposition(base, (1,) + rest) for rest in itertools.product((1, 2), repeat=k - 1)]


def decom1(base: SymbolMatrix) -> list[Decomposition]:
    return [d for d in enumerate_decompositions(base) if d.row_condition()]


def conjugators() -> dict[str, tuple[ConstMatrix, ConstMatrix]]:
    """Unitaries taking the b and c Weyl symbols to the a symbol, with inverses."""
    h = Exact.sqrt2_inv()
    i = Exact.i()
    n = ConstMatrix.of([[1, -i], [1, i]]).scale(h)
    ninv = ConstMatrix.of([[1, 1], [i, -i]]).scale(h)
    npr = ConstMatrix.of([[1, -1], [1, 1]]).scale(h)
    nprinv = ConstMatrix.of([[1, 1], [-1, 1]]).scale(h)
    return {"N": (n, ninv), "N'": (npr, nprinv)}


def conjugate(s: SymbolMatrix, u: ConstMatrix, uinv: ConstMatrix) -> SymbolMatrix:
    """u S u^{-1}."""
    return s.left(u).right(uinv)


def induced_norm(m: ConstMatrix, kind=2) -> float:
    """Operator norm on l^1, l^2 or l^inf (kind = 1, 2, np.inf)."""
    return float(np.linalg.norm(m.to_numpy(), ord=kind))


def dirac_symbol_for(dim: int, m: int) -> SymbolMatrix:
    """The first-order symbol natural for fields with the given shape."""
    table = {(3, 4): dirac_alpha_symbol, (4, 4): dirac_beta_symbol,
             (3, 2): sigma3d_symbol, (2, 2): lambda: weyl2d_symbol("a")}
    if (dim, m) not in table:
        raise ValueError(f"no Dirac-type symbol for dim={dim}, m={m}")
    return table[(dim, m)]()
