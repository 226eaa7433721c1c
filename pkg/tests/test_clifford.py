"""Exact Clifford algebra checks.

The expected symbol matrices and term lists below are written out by hand
from the block definitions, so they are independent of the code that
builds them.
"""
import json
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from diracsobolev import clifford as cl
from diracsobolev.clifford import Exact, SymbolMatrix

ONE = Exact(1)
I = Exact.i()
ZERO = Exact(0)


def entry(*pairs, dim):
    """Symbol entry from (p_index, coefficient) pairs."""
    c = [ZERO] * dim
    for j, v in pairs:
        c[j - 1] = c[j - 1] + v
    return tuple(c)


def hand_symbol(rows, dim):
    return SymbolMatrix(dim, tuple(tuple(entry(*e, dim=dim) for e in row) for row in rows))


Z = ()
# alpha . p, rows written out from offdiag(sigma_j, sigma_j)
ALPHA_HAND = hand_symbol([
    [Z, Z, ((3, ONE),), ((1, ONE), (2, -I))],
    [Z, Z, ((1, ONE), (2, I)), ((3, -ONE),)],
    [((3, ONE),), ((1, ONE), (2, -I)), Z, Z],
    [((1, ONE), (2, I)), ((3, -ONE),), Z, Z],
], 3)

BETA_HAND = hand_symbol([
    [Z, Z, ((3, ONE), (4, -I)), ((1, ONE), (2, -I))],
    [Z, Z, ((1, ONE), (2, I)), ((3, -ONE), (4, -I))],
    [((3, ONE), (4, I)), ((1, ONE), (2, -I)), Z, Z],
    [((1, ONE), (2, I)), ((3, -ONE), (4, I)), Z, Z],
], 4)

SIGMA_HAND = hand_symbol([
    [((3, ONE),), ((1, ONE), (2, -I))],
    [((1, ONE), (2, I)), ((3, -ONE),)],
], 3)

WEYL_HAND = {
    "a": hand_symbol([[Z, ((1, ONE), (2, -I))], [((1, ONE), (2, I)), Z]], 2),
    "b": hand_symbol([[((1, ONE),), ((2, ONE),)], [((2, ONE),), ((1, -ONE),)]], 2),
    "c": hand_symbol([[((1, ONE),), ((2, -I),)], [((2, I),), ((1, -ONE),)]], 2),
}


def terms_of(pairs, dim):
    return Counter((col, entry(*e, dim=dim)) for col, e in pairs)


ALPHA_TERMS = terms_of([
    (1, ((1, ONE), (2, I))), (1, ((3, ONE),)),
    (2, ((1, ONE), (2, -I))), (2, ((3, ONE),)),
    (3, ((1, ONE), (2, I))), (3, ((3, ONE),)),
    (4, ((1, ONE), (2, -I))), (4, ((3, ONE),)),
], 3)

BETA_TERMS = terms_of([
    (1, ((1, ONE), (2, I))), (1, ((3, ONE), (4, I))),
    (2, ((1, ONE), (2, -I))), (2, ((3, ONE), (4, -I))),
    (3, ((1, ONE), (2, I))), (3, ((3, ONE), (4, -I))),
    (4, ((1, ONE), (2, -I))), (4, ((3, ONE), (4, I))),
], 4)


class TestExactNumbers:
    def test_field_ops(self):
        r = Exact.sqrt2_inv()
        assert r * r == Exact(Fraction(1, 2))
        assert (ONE + I) * (ONE - I) == Exact(2)
        assert I * I == -ONE
        assert (r * I).conj() == -(r * I)

    @pytest.mark.parametrize("a,b,s", [(1, 0, 0), (3, -2, 1), (0, 5, 4), (-7, 1, 3), (1, 1, -1)])
    def test_scaled_roundtrip(self, a, b, s):
        x = Exact.from_scaled(a, b, s)
        assert complex(x) == pytest.approx(complex(a, b) * 2 ** (-s / 2))
        assert Exact.from_scaled(*x.to_scaled()) == x

    def test_mixed_value_not_scaled(self):
        with pytest.raises(ValueError):
            (ONE + Exact.sqrt2_inv()).to_scaled()


class TestAnticommutation:
    def test_alpha_residuals_exactly_zero(self):
        res = cl.anticommutator_residuals(cl.alpha_matrices())
        assert len(res) == 9
        assert all(m.is_zero() for m in res.values())

    def test_beta_residuals_exactly_zero(self):
        res = cl.anticommutator_residuals(cl.beta_matrices())
        assert len(res) == 16
        assert all(m.is_zero() for m in res.values())

    def test_pauli_residuals(self):
        assert all(m.is_zero() for m in cl.anticommutator_residuals(cl.pauli()).values())

    def test_broken_set_detected(self):
        a1, a2, a3 = cl.alpha_matrices()
        res = cl.anticommutator_residuals([a1, a1, a3])
        assert not res[(0, 1)].is_zero()

    def test_under_one_second(self):
        t0 = time.perf_counter()
        cl.anticommutator_residuals(cl.beta_matrices())
        cl.decom1(cl.dirac_beta_symbol())
        assert time.perf_counter() - t0 < 1.0


class TestSymbols:
    def test_alpha(self):
        assert cl.dirac_alpha_symbol() == ALPHA_HAND

    def test_beta(self):
        assert cl.dirac_beta_symbol() == BETA_HAND

    def test_sigma(self):
        assert cl.sigma3d_symbol() == SIGMA_HAND

    @pytest.mark.parametrize("v", ["a", "b", "c"])
    def test_weyl(self, v):
        assert cl.weyl2d_symbol(v) == WEYL_HAND[v]

    def test_coefficient_array_matches_numeric_symbol(self):
        rng = np.random.default_rng(0)
        p = rng.normal(size=4)
        c = cl.dirac_beta_symbol().coefficient_array()
        mats = [m.to_numpy() for m in cl.beta_matrices()]
        assert np.allclose(c @ p, sum(m * pj for m, pj in zip(mats, p)))


class TestDecompositions:
    @pytest.mark.parametrize("sym,count", [
        (cl.dirac_alpha_symbol, 128), (cl.dirac_beta_symbol, 128), (cl.sigma3d_symbol, 8)])
    def test_counts(self, sym, count):
        # unordered splits of k nonzero entries: 2**k / 2
        assert len(cl.enumerate_decompositions(sym())) == count

    @pytest.mark.parametrize("sym,count", [
        (cl.dirac_alpha_symbol, 8), (cl.dirac_beta_symbol, 8), (cl.sigma3d_symbol, 2)])
    def test_decom1(self, sym, count):
        assert len(cl.decom1(sym())) == count

    def test_trivial_split_fails_row_condition(self):
        s = cl.dirac_alpha_symbol()
        d = cl.Decomposition.trivial(s)
        assert not d.row_condition()
        assert d.part(2).is_zero()

    def test_parts_sum_back(self):
        s = cl.dirac_beta_symbol()
        for d in cl.enumerate_decompositions(s)[:20]:
            assert d.part(1) + d.part(2) == s

    def test_decom1_alpha_terms_all_equal(self):
        for d in cl.decom1(cl.dirac_alpha_symbol()):
            assert d.canonical_terms().counts() == ALPHA_TERMS

    def test_decom1_beta_terms_all_equal(self):
        for d in cl.decom1(cl.dirac_beta_symbol()):
            assert d.canonical_terms().counts() == BETA_TERMS

    def test_column_split_alpha(self):
        s = cl.dirac_alpha_symbol()
        d = cl.Decomposition.from_parts(s, s.columns([1, 3]))
        assert d.row_condition()
        assert d.canonical_terms().counts() == ALPHA_TERMS

    def test_block_split_alpha(self):
        # part 1 = [[0, sigma1 p1 + sigma2 p2], [sigma3 p3, 0]]
        s1, s2, s3 = cl.pauli()
        top = cl.operator_symbol([s1, s2], indices=[1, 2], dim=3)
        bot = cl.operator_symbol([s3], indices=[3], dim=3)
        part1 = cl.block_symbol([[None, top], [bot, None]])
        d = cl.Decomposition.from_parts(cl.dirac_alpha_symbol(), part1)
        assert d.row_condition()
        assert d.canonical_terms().counts() == ALPHA_TERMS

    def test_beta_half_split_fails(self):
        s = cl.dirac_beta_symbol()
        d = cl.Decomposition.from_parts(s, s.columns([1, 2]))
        assert not d.row_condition()

    def test_non_entrywise_split_rejected(self):
        s = cl.dirac_alpha_symbol()
        bogus = s.columns([1]) + s.columns([1])
        with pytest.raises(ValueError):
            cl.Decomposition.from_parts(s, bogus)

    def test_canonical_label(self):
        for d in cl.enumerate_decompositions(cl.sigma3d_symbol()):
            assert d.labels[0] == 1

    def test_json_roundtrip(self):
        for d in cl.decom1(cl.dirac_beta_symbol()):
            text = json.dumps(d.to_json())
            back = cl.Decomposition.from_json(json.loads(text))
            assert back == d
            assert back.to_json()["terms"] == d.to_json()["terms"]


class TestConjugation:
    def test_b_to_a(self):
        n, ninv = cl.conjugators()["N"]
        assert cl.conjugate(cl.weyl2d_symbol("b"), n, ninv) == cl.weyl2d_symbol("a")

    def test_c_to_a(self):
        n, ninv = cl.conjugators()["N'"]
        assert cl.conjugate(cl.weyl2d_symbol("c"), n, ninv) == cl.weyl2d_symbol("a")

    def test_inverses_exact(self):
        for u, uinv in cl.conjugators().values():
            assert (u @ uinv).is_identity()
            assert (uinv @ u).is_identity()

    @pytest.mark.parametrize("kind", [1, 2, np.inf])
    def test_induced_norms_at_most_sqrt2(self, kind):
        for u, uinv in cl.conjugators().values():
            for m in (u, uinv):
                assert cl.induced_norm(m, kind) <= np.sqrt(2) + 1e-12
