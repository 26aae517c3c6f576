from __future__ import annotations

import itertools
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmfrag.cm import enumerate_matchings, sample_cm
from cmfrag.degseq import DegreeSequence
from cmfrag.multigraph import (
    CycleBudgetExceeded,
    Fragment,
    Multigraph,
    brute_force_aut,
    canonicalize,
    classify_components,
    count_cycles,
    extract_fragment,
    from_matching,
    general_authe,
)
from graph_oracles import random_fragment_graph, relabel

# --------------------------------------------------------------------------
# oracles


def brute_cycles(G: Multigraph, K: int) -> list[int]:
    """Count cycles by checking every edge subset of size k (small graphs)."""
    E = G.edges.tolist()
    out = []
    for k in range(1, K + 1):
        c = 0
        for sub in itertools.combinations(range(len(E)), k):
            deg: Counter = Counter()
            for j in sub:
                u, v = E[j]
                deg[u] += 1
                deg[v] += 1
            if len(deg) != k or any(x != 2 for x in deg.values()):
                continue
            # connected?
            seen = {E[sub[0]][0]}
            grew = True
            while grew:
                grew = False
                for j in sub:
                    u, v = E[j]
                    if (u in seen) != (v in seen):
                        seen |= {u, v}
                        grew = True
            c += len(seen) == k
        out.append(c)
    return out


def isomorphic(G: Multigraph, H: Multigraph) -> bool:
    if G.n != H.n or G.n_edges != H.n_edges:
        return False
    target = sorted(map(tuple, H.edges.tolist()))
    for p in itertools.permutations(range(G.n)):
        e = sorted(tuple(sorted((p[u], p[v]))) for u, v in G.edges.tolist())
        if e == target:
            return True
    return False


# --------------------------------------------------------------------------
# basic structure


def test_loops_and_multiplicities():
    G = Multigraph.from_edges(3, [(0, 0), (1, 0), (0, 1), (1, 2)])
    assert G.edges.tolist() == [[0, 0], [0, 1], [0, 1], [1, 2]]
    assert G.loops == {0: 1}
    assert G.mult == {(0, 1): 2, (1, 2): 1}
    assert G.degrees.tolist() == [4, 3, 1]
    assert not G.is_simple()


def test_from_matching():
    d = DegreeSequence([3, 1, 1, 1])
    G = from_matching(d, [(0, 1), (2, 3), (4, 5)])
    assert G.edges.tolist() == [[0, 0], [0, 1], [2, 3]]
    assert from_matching(d, [(1, 2), (3, 4), (5, 6)], base=1) == G
    with pytest.raises(ValueError):
        from_matching(d, [(0, 1), (1, 2), (4, 5)])


def test_component_classes():
    # triangle, a tree, and K4 (excess 2)
    k4 = [(u, v) for u, v in itertools.combinations(range(5, 9), 2)]
    G = Multigraph.from_edges(9, [(0, 1), (1, 2), (2, 0), (3, 4)] + k4)
    rep = classify_components(G)
    assert rep.counts == {"unicyclic": 1, "tree": 1, "complex": 1}
    assert rep.n_complex == 1


# --------------------------------------------------------------------------
# cycle counting


def test_cycle_counts_examples():
    G = Multigraph.from_edges(2, [(0, 1)] * 3 + [(0, 0)])
    assert count_cycles(G, 3).counts.tolist() == [1, 3, 0]
    k4 = Multigraph.from_edges(4, list(itertools.combinations(range(4), 2)))
    assert count_cycles(k4, 4).counts.tolist() == [0, 0, 4, 3]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=7), st.integers(0, 2**32 - 1))
def test_cycle_counts_match_brute_force(degs, seed):
    if sum(degs) % 2:
        degs = degs + [1]
    if sum(degs) > 20:
        return
    G = sample_cm(DegreeSequence(degs), seed)
    K = G.n
    assert count_cycles(G, K).counts.tolist() == brute_cycles(G, K)


def test_cycle_budget():
    k6 = Multigraph.from_edges(6, list(itertools.combinations(range(6), 2)))
    with pytest.raises(CycleBudgetExceeded):
        count_cycles(k6, 6, budget=10)


# --------------------------------------------------------------------------
# canonical codes


def test_codes_for_small_shapes():
    assert extract_fragment(Multigraph.from_edges(1, [(0, 0)])).code == "C1:()"
    assert extract_fragment(Multigraph.from_edges(2, [(0, 1), (0, 1)])).code == "C2:()()"
    assert extract_fragment(Multigraph.from_edges(3, [(0, 1), (1, 2)])).code == "E"
    tri = extract_fragment(Multigraph.from_edges(4, [(0, 1), (1, 2), (2, 0), (0, 3)]))
    assert tri.code == "C3:(())()()"


def test_loop_plus_path_differs_from_loop_plus_two_leaves():
    a = Multigraph.from_edges(3, [(0, 0), (0, 1), (1, 2)])
    b = Multigraph.from_edges(3, [(0, 0), (0, 1), (0, 2)])
    assert canonicalize(a) != canonicalize(b)


def test_from_code_normalizes():
    H = Fragment.from_code("C3:()()(())+C1:()")
    assert H.code == "C1:()+C3:(())()()"
    assert Fragment.from_code(H.code) == H
    assert Fragment.from_code("E").is_empty


def test_non_unicyclic_rejected():
    with pytest.raises(ValueError):
        canonicalize([(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        canonicalize([(0, 1), (0, 1), (0, 1)])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_code_invariant_under_relabeling(seed, perm_seed):
    G = random_fragment_graph(seed)
    H = extract_fragment(G)
    assert extract_fragment(relabel(G, perm_seed)) == H
    # decode gives an isomorphic graph with the same code
    assert extract_fragment(H.decode()) == H
    assert H.n_vertices == G.n


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_code_equality_iff_isomorphic(s1, s2):
    G = random_fragment_graph(s1, max_comps=1, max_k=3, max_extra=2)
    H = random_fragment_graph(s2, max_comps=1, max_k=3, max_extra=2)
    if G.n != H.n or G.n > 8:
        return
    same = extract_fragment(G) == extract_fragment(H)
    assert same == isomorphic(G, H)


# --------------------------------------------------------------------------
# automorphisms


def test_two_triangles_aut():
    H = Fragment.from_code("C3:()()()+C3:()()()")
    assert H.aut == 72
    assert brute_force_aut(H.decode()) == 72


def test_authe_examples():
    assert Fragment.from_code("C1:()").authe == 2
    assert Fragment.from_code("C2:()()").authe == 4
    assert Fragment.from_code("C1:()+C1:()").authe == 8
    assert Fragment.from_code("C2:(())()").authe == 2


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_aut_matches_brute_force(seed):
    G = random_fragment_graph(seed, max_comps=2, max_k=3, max_extra=2)
    if G.n > 9:
        return
    H = extract_fragment(G)
    assert H.aut == brute_force_aut(G)
    assert H.authe == general_authe(G)


@pytest.mark.parametrize("code", ["C1:()", "C2:()()", "C1:(())", "C3:()()()", "C1:()+C1:()",
                                  "C2:(())()", "C1:()+C2:()()", "C1:(()())", "C3:(())()()"])
def test_authe_from_matching_count(code):
    """Matchings realizing H on its own degree sequence number n! prod d_v! / authe(H)."""
    H = Fragment.from_code(code)
    G = H.decode()
    d = DegreeSequence(G.degrees)
    dist = enumerate_matchings(d, lambda M: extract_fragment(M).code == H.code)
    total = math.prod(range(d.half_edges - 1, 0, -2))
    count = dist[True] * total
    # all labeled copies on n vertices, each hit by prod d_v!/(2^loops prod mult!) matchings;
    # dividing by the labelings of d that fix the degree vector removes the relabeling factor
    labelings = math.factorial(G.n) // math.prod(math.factorial(c) for c in d.counts.values())
    per_copy = math.prod(math.factorial(int(x)) for x in G.degrees)
    expected = Fraction_int(math.factorial(G.n) * per_copy, H.authe * labelings)
    assert count == expected


def Fraction_int(a: int, b: int) -> int:
    q, r = divmod(a, b)
    assert r == 0
    return q
