from __future__ import annotations

import numpy as np
import pytest
from conftest import family_model
from hypothesis import given, settings
from hypothesis import strategies as st

from cmfrag.fragcat import enumerate_fragments
from cmfrag.kakeya import (
    IntervalExplosion,
    analyze,
    harmonic_partial,
    kakeya_check,
    partial_sum_union,
    safe_tail_index,
    subset_sums,
    threshold_report,
)
from cmfrag.limits import Q, solve_nu0


def test_kakeya_check_examples():
    geo = [0.5**k for k in range(1, 30)]
    assert kakeya_check(geo, 0.5**29).full_interval
    r = kakeya_check([0.6, 0.3, 0.1])
    assert not r.full_interval and r.first_violation == 1
    assert kakeya_check([0.3, 0.3, 0.2, 0.2]).first_violation == 4
    with pytest.raises(ValueError):
        kakeya_check([0.1, 0.2])


def test_union_small():
    U = partial_sum_union([0.5, 0.3], 0.1)
    assert U.intervals == pytest.approx(np.array([[0, 0.1], [0.3, 0.4], [0.5, 0.6], [0.8, 0.9]]))
    assert np.array(U.gaps(0, 0.9)) == pytest.approx(np.array([(0.1, 0.3), (0.4, 0.5), (0.6, 0.8)]))
    assert U.contains(0.35) and not U.contains(0.45)
    assert U.is_symmetric(1e-12) is False
    assert U.fattened(0.09).is_full(0.0, 0.9) is False
    assert U.fattened(0.1).is_full(-0.1, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=12), st.floats(0.0, 0.5))
def test_union_full_iff_kakeya(head, T):
    """With a continuous tail of mass T the union is an interval iff each term is at most its tail."""
    head = sorted(head, reverse=True)
    total = sum(head) + T
    U = partial_sum_union(head, T)
    ok = kakeya_check(head, T).full_interval
    margin = min(abs(p - t) for p, t in zip(head, np.cumsum(head[::-1])[::-1][1:].tolist() + [0.0]))
    if margin + T < 1e-9 or any(abs(p - t - T) < 1e-9 for p, t in
                                zip(head, np.cumsum(head[::-1])[::-1][1:].tolist() + [0.0])):
        return  # too close to call in floating point
    assert U.is_full(0.0, total, tol=1e-12) == ok


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=10), st.integers(2, 6))
def test_union_sound_and_tight(head, r):
    """Union contains all partial sums, and lies within the tail resolution of one."""
    head = sorted(head, reverse=True)
    T = min(head) * 0.9
    # tail T/2, T/4, ..., T/2^r, T/2^r: subset sums form the grid of step T/2^r on [0, T]
    tail = [T / 2**j for j in range(1, r + 1)] + [T / 2**r]
    U = partial_sum_union(head, T)
    S = subset_sums(head + tail)
    assert all(U.contains(s, tol=1e-12) for s in S)
    step = T / 2**r
    for a, b in U.tolist():
        for x in np.linspace(a, b, 7):
            assert np.min(np.abs(S - x)) <= step / 2 + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=10), st.floats(0.0, 0.3))
def test_union_symmetric_under_complement(head, T):
    """A subset and its complement have sums x and total - x."""
    head = sorted(head, reverse=True)
    total = sum(head) + T
    U = partial_sum_union(np.array(head) / total, T / total)
    assert U.is_symmetric(1e-9)


def test_interval_cap():
    with pytest.raises(IntervalExplosion):
        partial_sum_union([2.0**-k for k in range(1, 30)], 0.0, max_intervals=100)


def test_safe_tail_index():
    for nu in (0.5, 0.9, 0.99):
        K = safe_tail_index(nu)
        assert harmonic_partial(K) >= 4 / nu > harmonic_partial(K - 1)


def test_threshold_report_flip():
    nu0 = solve_nu0(1e-12)
    assert threshold_report(nu0 - 1e-9)["verdict"] == "gap"
    assert threshold_report(nu0 + 1e-9)["verdict"] == "full"
    assert threshold_report(1.5)["verdict"] == "full"


@pytest.mark.parametrize("nu", [0.5, 0.9])
def test_analyze_gap(nu):
    rep = analyze(family_model(nu), eps=1e-4)
    q = Q(nu)
    assert rep.verdict == "gap" and rep.threshold_verdict == "gap"
    g = rep.gaps[0]
    assert g.i == 1 and g.tail == pytest.approx(1 - q) and g.p_i == pytest.approx(q)
    assert not rep.union.contains(0.5)
    assert rep.union.is_symmetric(1e-9)


@pytest.mark.parametrize("nu", [0.94, 0.99])
def test_analyze_full(nu):
    rep = analyze(family_model(nu), eps=1e-4)
    assert rep.verdict == "full" and rep.threshold_verdict == "full" and not rep.gaps


@pytest.mark.parametrize("nu", [0.3, 0.7, 0.95])
def test_refinement_consistency(nu):
    m = family_model(nu)
    coarse = analyze(m, eps=1e-3).union
    fine = analyze(m, eps=1e-5).union
    # a finer head can only remove points, and removes none farther than the coarse floor
    assert coarse.covers(fine, tol=1e-12)
    assert fine.fattened(1e-3).covers(coarse, tol=1e-12)
    assert len(coarse) == len(fine)


def test_gap_soundness_scan():
    m = family_model(0.6)
    cat = enumerate_fragments(m, 1e-5, "simple")
    rep = analyze(m, eps=1e-5, catalogue=cat)
    assert rep.gaps
    head = cat.probs
    rng = np.random.default_rng(0)
    S = np.concatenate([subset_sums(head[:16]),
                        (rng.random((20_000, head.size)) < 0.5) @ head + rng.random(20_000) * rep.tail_mass])
    for g in rep.gaps:
        assert not np.any((S > g.tail + 1e-12) & (S < g.p_i - 1e-12))


def test_analyze_input_checks():
    with pytest.raises(ValueError):
        analyze(family_model(0.5), eps=1e-3, catalogue=enumerate_fragments(family_model(0.5), 1e-3))
    with pytest.raises(ValueError):
        analyze(family_model(1.2), eps=1e-3)
