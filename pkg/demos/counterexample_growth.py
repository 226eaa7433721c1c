"""Logarithmic growth of the L^q norm against a bounded Dirac L^1 norm.

Run: python3 demos/counterexample_growth.py
"""
from diracsobolev import counterexample as ce

for fam in ("alpha", "beta"):
    F = ce.get_family(fam)
    ns = [4, 16, 64, 256, 1024]
    l1 = [ce.l1_dirac(fam, n).value for n in ns]
    lq = [ce.lq_norm(fam, n).value for n in ns]
    print(f"{fam} (q = {F.q:g})")
    for n, a, b in zip(ns, l1, lq):
        print(f"  n={n:5d}  ||D f||_1 = {a:8.3f}   ||f||_q = {b:8.3f}")
    gamma, _, _ = ce.fit_log_power(ns, lq)
    print(f"  fitted ||f||_q ~ (log n)^{gamma:.3f}; l1 stays below {ce.paper_bounds(fam, ns[-1]).l1_uniform:.2f}")
