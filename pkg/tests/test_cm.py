from __future__ import annotations

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cmfrag.cm import (
    MatchingSampler,
    SimpleSamplingFailure,
    all_matchings,
    double_factorial_odd,
    enumerate_matchings,
    matching_key,
    sample_cm,
    sample_matchings,
    sample_simple,
    trial_rng,
)
from cmfrag.degseq import DegreeSequence
from cmfrag.limits import expected_loops


@pytest.mark.parametrize("m", [0, 2, 4, 6, 8, 10])
def test_all_matchings_count_and_distinct(m):
    mats = all_matchings(m)
    assert mats.shape[0] == double_factorial_odd(m)
    assert len({matching_key(x) for x in mats}) == mats.shape[0]
    for x in mats[:50]:
        assert sorted(x.ravel().tolist()) == list(range(m))


@pytest.mark.parametrize(
    "degs, p_simple",
    [
        ((2, 2), Fraction(0)),
        ((2, 1, 1), Fraction(2, 3)),
        ((1, 1, 1, 1), Fraction(1)),
        # the triangle is hit by 2^3 of the 15 matchings
        ((2, 2, 2), Fraction(8, 15)),
        # the star is hit by 3! of the 15 matchings
        ((3, 1, 1, 1), Fraction(2, 5)),
    ],
)
def test_exact_simplicity(degs, p_simple):
    d = DegreeSequence(degs)
    dist = enumerate_matchings(d, "is_simple")
    assert dist.total() == 1
    assert dist[True] == p_simple


@pytest.mark.parametrize("degs", [(2, 2), (2, 1, 1), (2, 2, 2), (3, 1, 1, 1), (3, 3, 2), (4, 2, 1, 1)])
def test_exact_loop_mean_matches_closed_form(degs):
    d = DegreeSequence(degs)
    assert enumerate_matchings(d, "loops").expect() == expected_loops(d, exact=True)


def test_fragment_statistic():
    dist = enumerate_matchings(DegreeSequence((2, 2)), "fragment")
    assert dist.probs == {"C1:()+C1:()": Fraction(1, 3), "C2:()()": Fraction(2, 3)}


def test_oracle_bound():
    with pytest.raises(ValueError):
        enumerate_matchings(DegreeSequence([2] * 8), bound=14)


def test_sampler_is_uniform_on_matchings():
    d = DegreeSequence((3, 2, 1))
    m = d.half_edges
    N = 60_000
    mats = sample_matchings(d, N, seed=11)
    cnt = Counter(matching_key(x) for x in mats)
    n_match = double_factorial_odd(m)
    assert len(cnt) == n_match
    obs = np.array(list(cnt.values()))
    assert stats.chisquare(obs).pvalue > 1e-4


def test_single_and_batch_draws_are_permutations():
    d = DegreeSequence((3, 3, 2, 1, 1))
    s = MatchingSampler(d, np.random.default_rng(0))
    assert sorted(s.draw().ravel().tolist()) == list(range(d.half_edges))
    many = s.draw_many(100)
    assert np.all(np.sort(many.reshape(100, -1), axis=1) == np.arange(d.half_edges))


def test_exchangeability_of_vertices():
    # vertices with equal degree are exchangeable: each leaf hits the hub equally often
    d = DegreeSequence((3, 1, 1, 1, 2))
    N = 40_000
    ends = np.sort(d.owner[sample_matchings(d, N, seed=5)], axis=2)
    hits = [int(np.sum((ends[:, :, 0] == 0) & (ends[:, :, 1] == v))) for v in (1, 2, 3)]
    assert stats.chisquare(hits).pvalue > 1e-4


def test_determinism():
    d = DegreeSequence([3, 3, 2, 2, 1, 1])
    assert sample_cm(d, 42) == sample_cm(d, 42)
    a = trial_rng(7, "exp", 3).integers(1 << 30, size=4)
    b = trial_rng(7, "exp", 3).integers(1 << 30, size=4)
    c = trial_rng(7, "exp", 4).integers(1 << 30, size=4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_sample_simple():
    d = DegreeSequence((2, 2, 2))
    res = sample_simple(d, 1)
    assert res.graph.is_simple() and res.attempts >= 1
    with pytest.raises(SimpleSamplingFailure):
        sample_simple(DegreeSequence((2, 2)), 1, max_tries=20)


def test_odd_half_edges_rejected():
    with pytest.raises(ValueError):
        DegreeSequence((1, 1, 1))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=20), st.integers(0, 2**63 - 1))
def test_degrees_preserved(degs, seed):
    if sum(degs) % 2:
        degs = degs + [1]
    d = DegreeSequence(degs)
    G = sample_cm(d, seed)
    assert G.degrees.tolist() == list(degs)
