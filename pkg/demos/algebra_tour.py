"""Exact Dirac matrices and the splits of their operator symbols.

Run: python3 demos/algebra_tour.py
"""
from diracsobolev import clifford as cl

# anticommutators {a_j, a_k} - 2 delta_jk I vanish exactly, no tolerance involved
for name, mats in (("alpha", cl.alpha_matrices()), ("beta", cl.beta_matrices())):
    res = cl.anticommutator_residuals(mats)
    print(f"{name}: {len(res)} anticommutator pairs, all zero: {all(r.is_zero() for r in res.values())}")

sym = cl.dirac_alpha_symbol()
print("\n3-d Dirac symbol (entries are linear forms in p1..p3):")
print(sym)

splits = cl.enumerate_decompositions(sym)
good = cl.decom1(sym)
print(f"\nunordered splits: {len(splits)}, of which {len(good)} satisfy both row conditions")
same = all(d.canonical_terms().counts() == good[0].canonical_terms().counts() for d in good)
print(f"all {len(good)} produce the same {sum(good[0].canonical_terms().counts().values())} seminorm terms: {same}")

# the 2-d Weyl variants are unitarily equivalent
for key, v in (("N", "b"), ("N'", "c")):
    u, uinv = cl.conjugators()[key]
    print(f"{key} maps variant {v} onto a: {cl.conjugate(cl.weyl2d_symbol(v), u, uinv) == cl.weyl2d_symbol('a')}")
