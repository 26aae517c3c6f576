"""
Auxiliary inequalities and loops under heavy tails
===================================================

Exact rational checks of the product inequality, the decay of the
log-ratio bound, and a degree family whose second moment diverges, where
loops become almost certain.
"""

from cmfrag.harness import ExperimentSpec, heavy_tail_sequence, run
from cmfrag.limits import aux_ineq_sides, check_appendix_inequalities, expected_loops

lhs, rhs = aux_ineq_sides([5, 7], [2, 3])
print(f"alpha=(5,7) beta=(2,3): {lhs} >= {rhs}")
r = check_appendix_inequalities(samples=10_000)
print("violations:", len(r["violations"]), " sup by N:", [f"{x['sup']:.4f}" for x in r["sup_table"]])

for n in (10**3, 10**4, 10**5):
    print(f"n={n}: expected loops {expected_loops(heavy_tail_sequence(n)):.2f}")
rep = run(ExperimentSpec("loop_divergence", "demo", ns=[1000, 10_000, 100_000], trials=500, seed=1))
for row in rep.rows:
    print(f"  {row.statistic:22s} n={row.n} {row.empirical:.3f}")
