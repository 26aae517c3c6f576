"""
When do limit probabilities fill [0, 1]?
========================================

The closure of achievable limit probabilities is the set of partial sums of
the simple-fragment probabilities. Below nu0 (where Q(nu) = 1/2) the empty
fragment alone exceeds all the rest and leaves a gap (1-Q, Q); above nu0
the partial sums cover [0, 1].
"""

from cmfrag import DegreeModel, analyze, solve_nu0


def family(nu, c=0.05):
    lam2 = (nu + 2 * nu * c - 6 * c) / (2 - nu)
    return DegreeModel({1: 1 - lam2 - c, 2: lam2, 3: c})


print(f"nu0 = {solve_nu0(1e-10):.10f}")
for nu in (0.5, 0.9, 0.93, 0.94, 0.97):
    rep = analyze(family(nu), eps=1e-5)
    gaps = [(round(a, 4), round(b, 4)) for a, b in rep.union.gaps()]
    print(f"nu={nu:.2f} Q={rep.Q:.4f} verdict={rep.verdict:4s} head={rep.head_size:5d} gaps={gaps[:3]}")
