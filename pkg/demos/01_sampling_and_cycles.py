"""
Sampling the configuration model and counting its short cycles
================================================================

Draw multigraphs with a prescribed degree distribution, count cycles of
length 1..4 and compare the averages with the Poisson means nu^k / 2k.
"""

import numpy as np

from cmfrag import DegreeModel, count_cycles, realize
from cmfrag.cm import MatchingSampler, enumerate_matchings, trial_rng
from cmfrag.degseq import DegreeSequence
from cmfrag.limits import Q, prob_simple_limit, xi

# degree law P(D=1)=0.6, P(D=2)=0.3, P(D=3)=0.1, so nu = E[D(D-1)]/E[D] = 0.8
model = DegreeModel({1: 0.6, 2: 0.3, 3: 0.1})
nu = float(model.nu)
d = realize(model, 5000)
print("n =", d.n, "half-edges =", d.half_edges, "nu =", nu)

# one independent stream per trial keeps runs reproducible
trials = 300
X = np.zeros((trials, 4))
simple = np.zeros(trials, bool)
acyclic = np.zeros(trials, bool)
for t in range(trials):
    G = MatchingSampler(d, trial_rng(1, "demo", t)).sample()
    c = count_cycles(G, d.n)
    X[t] = c.counts[:4]
    simple[t] = G.is_simple()
    acyclic[t] = c.total() == 0

for k in range(1, 5):
    print(f"k={k}: mean X_k = {X[:, k - 1].mean():.3f}   nu^k/2k = {xi(k, nu):.3f}")
print(f"P(simple)           {simple.mean():.3f}   limit {prob_simple_limit(nu):.3f}")
print(f"P(acyclic | simple) {acyclic[simple].mean():.3f}   limit {Q(nu):.3f}")

# tiny sequences have an exact law: (2,2,2) is a triangle for 8 of the 15 matchings
print("exact P(simple) for (2,2,2):", enumerate_matchings(DegreeSequence((2, 2, 2)), "is_simple")[True])
