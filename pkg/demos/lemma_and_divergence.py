"""Check the truncation level-set identity, then watch the improved ratio grow.

Run: python3 demos/lemma_and_divergence.py
"""
from diracsobolev import grid as fg
from diracsobolev import inequalities as iq

spec = fg.GridSpec(3, 4, 10.0, 64)
f = fg.random_test_fields(0, spec, "gaussian_bump", 1, real=True)[0]
for p, q, c in ((1.0, 1.5, 10.0), (2.0, 3.0, 5.0)):
    r = iq.lemma41_check(f, p, q, c)
    print(f"p={p:g} q={q:g} c={c:g}: lhs {r.lhs:.6e}  rhs {r.rhs:.6e}  rel_err {r.rel_err:.1e} "
          f"(refined {r.rel_err_refined:.1e})")

print()
for fam in ("alpha", "beta"):
    rep = iq.divergence_probe(fam, [4, 16, 64, 256])
    ratios = " ".join(f"{x:.3f}" for x in rep.ratios["dirac"])
    print(f"{fam}: Dirac ratios {ratios}  ~ (log n)^{rep.exponent('dirac'):.3f}")
