"""Acceptance criteria 1-11, each at its stated tolerance.

Every criterion prints one ``criterion N: PASS|FAIL ...`` line; the lines are
repeated in the pytest terminal summary. Seeds are fixed in advance. Run
directly with ``python tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
from conftest import family_model

from cmfrag.branching import sample_limit_fragments
from cmfrag.degseq import DegreeModel, DegreeSequence
from cmfrag.fragcat import enumerate_fragments
from cmfrag.harness import ExperimentSpec, run, run_oracle_equivalence, tv_top
from cmfrag.kakeya import analyze, subset_sums, threshold_report
from cmfrag.limits import Q, check_appendix_inequalities, p_acyc, solve_nu0

SEED = 20261015
RESULTS: list[str] = []

# lambda_1 = 0.6, lambda_2 = 0.3, lambda_3 = 0.1: nu = 0.8
MODEL_08 = DegreeModel({1: 0.6, 2: 0.3, 3: 0.1})
# nu = 0.5
MODEL_05 = DegreeModel({1: 0.76, 2: 0.2, 3: 0.04})


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


_cycle_cache: dict = {}


def cycle_report():
    if "rep" not in _cycle_cache:
        spec = ExperimentSpec("cycle_law", "acceptance-cycles", ns=[5000], trials=2000, seed=SEED,
                              model=MODEL_08)
        t = time.perf_counter()
        _cycle_cache["rep"] = run(spec)
        _cycle_cache["time"] = time.perf_counter() - t
    return _cycle_cache["rep"], _cycle_cache["time"]


def test_criterion_01_nu0():
    nu0 = solve_nu0(1e-7)
    reps = 1000
    t = time.perf_counter()
    for _ in range(reps):
        solve_nu0(1e-7)
    dt = (time.perf_counter() - t) / reps
    ok = abs(nu0 - 0.9368317) <= 1e-6 and dt < 1e-3
    record(1, ok, f"nu0={nu0:.10f} runtime={dt * 1e6:.1f}us")


def test_criterion_02_oracle():
    t = time.perf_counter()
    worst, details = 0.0, []
    ok = True
    for degs in [(2, 2), (2, 1, 1), (1, 1, 1, 1), (2, 2, 2), (3, 1, 1, 1)]:
        spec = ExperimentSpec("oracle", f"acceptance-oracle-{degs}", trials=10**6, seed=SEED,
                              degrees=DegreeSequence(degs))
        rep = run_oracle_equivalence(spec)
        z = max(r.empirical for r in rep.rows if r.statistic.endswith("max_z"))
        worst = max(worst, z)
        ok &= rep.passed
        details.append(f"{degs}:{z:.2f}")
    dt = time.perf_counter() - t
    ok &= worst <= 4 and dt < 120
    record(2, ok, f"max|z|={worst:.2f} ({' '.join(details)}) runtime={dt:.1f}s")


def test_criterion_03_cycle_poisson():
    rep, dt = cycle_report()
    rows = [r for r in rep.rows if r.statistic.startswith(("mean_X", "dispersion_X", "cov_X"))]
    ok = all(r.passed for r in rows) and dt < 300
    zs = max(abs(r.z) for r in rows if r.z is not None)
    disp = [round(r.empirical, 3) for r in rows if r.statistic.startswith("dispersion")]
    bad = [r.statistic for r in rows if not r.passed]
    record(3, ok, f"max|z|={zs:.2f} dispersion={disp} runtime={dt:.1f}s failed={bad}")


def test_criterion_04_simple_acyclic():
    rep, _ = cycle_report()
    ps, pa = rep.find("p_simple"), rep.find("p_acyclic_given_simple")
    nu = 0.8
    series_gap = abs(p_acyc(nu, "series") - Q(nu))
    ok = abs(ps.z) <= 3 and abs(pa.z) <= 3 and series_gap <= 1e-12
    record(4, ok, f"z_simple={ps.z:.2f} z_acyclic={pa.z:.2f} |series-closed|={series_gap:.1e}")


def test_criterion_05_fragment_law():
    spec = ExperimentSpec("fragment_law", "acceptance-fragments", ns=[10_000], trials=5000, seed=SEED,
                          model=MODEL_05, top_m=20, catalogue_floor=1e-5)
    rep = run(spec)
    tv, cx = rep.find("tv_fragment"), rep.find("complex_freq")
    ok = tv.empirical < 0.02 and cx.empirical < 0.01
    record(5, ok, f"TV={tv.empirical:.4f} complex={cx.empirical:.4f}")


def test_criterion_06_catalogue_completeness():
    t = time.perf_counter()
    cat = enumerate_fragments(MODEL_05, 1e-8)
    dt = time.perf_counter() - t
    total = cat.enumerated_mass + cat.tail_mass
    ok = abs(total - 1) <= 1e-6 and dt < 60
    record(6, ok, f"entries={len(cat)} enumerated+tail={total:.12f} runtime={dt:.1f}s")


def test_criterion_07_branching():
    cat = enumerate_fragments(MODEL_05, 1e-5)
    N = 10**6
    frags, over = sample_limit_fragments(MODEL_05, N, seed=SEED)
    codes = [f.code for f in frags if f is not None]
    tv, _ = tv_top(codes, cat, 20)
    p = math.sqrt(1 - 0.5)
    empty = sum(1 for c in codes if c == "E")
    z = (empty - len(codes) * p) / math.sqrt(len(codes) * p * (1 - p))
    ok = tv < 0.01 and abs(z) <= 3
    record(7, ok, f"TV={tv:.5f} z_empty={z:.2f} overflows={over}")


def test_criterion_08_kakeya():
    out = []
    ok = True
    for nu in (0.5, 0.9):
        cat = enumerate_fragments(family_model(nu), 1e-6, "simple")
        rep = analyze(family_model(nu), catalogue=cat)
        q = Q(nu)
        covered = any(a <= 1 - q + 1e-12 and b >= q - 1e-12 for a, b in rep.union.gaps())
        certified = any(abs(g.tail - (1 - q)) < 1e-9 and abs(g.p_i - q) < 1e-9 for g in rep.gaps)
        # no partial sum inside any certified gap: all subsets of the top 16, plus random subsets
        head = cat.probs
        rng = np.random.default_rng(SEED)
        S = np.concatenate([subset_sums(head[:16]),
                            (rng.random((20_000, head.size)) < 0.5) @ head + rng.random(20_000) * rep.tail_mass])
        sound = all(not np.any((S > g.tail + 1e-12) & (S < g.p_i - 1e-12)) for g in rep.gaps)
        ok &= rep.verdict == "gap" and covered and certified and sound
        out.append(f"nu={nu}:{rep.verdict}")
    for nu in (0.94, 0.99):
        rep = analyze(family_model(nu))
        ok &= rep.verdict == "full" and rep.union.is_full()
        out.append(f"nu={nu}:{rep.verdict}")
    nu0 = solve_nu0(1e-12)
    grid = np.round(np.arange(1, 1000) * 1e-3, 3)
    flips = all((threshold_report(v)["verdict"] == "gap") == (v < nu0) for v in grid)
    near = [v for v in grid if 0.925 <= v <= 0.950]
    union_flips = all((analyze(family_model(v), eps=1e-4).verdict == "gap") == (v < nu0) for v in near)
    ok &= flips and union_flips
    record(8, ok, f"{' '.join(out)} grid_flip={flips} union_flip_near_nu0={union_flips}")


def test_criterion_09_appendix():
    r = check_appendix_inequalities(samples=100_000, seed=SEED)
    sups = [round(x["sup"], 5) for x in r["sup_table"]]
    ok = not r["violations"] and r["decreasing"]
    record(9, ok, f"violations={len(r['violations'])}/100000 sup={sups}")


def test_criterion_10_total_cycles():
    spec = ExperimentSpec("cycle_law", "acceptance-total-cycles", ns=[1000, 10_000], trials=5000,
                          seed=SEED, model=MODEL_08)
    rep = run(spec)
    r3, r4 = rep.find("total_cycles_rel_err", 1000), rep.find("total_cycles_rel_err", 10_000)
    ok = r4.empirical <= 0.05
    record(10, ok, f"rel_err n=1e3: {r3.empirical:.4f}, n=1e4: {r4.empirical:.4f} (limit {-0.5 * math.log(0.2):.4f})")


def test_criterion_11_loop_divergence():
    spec = ExperimentSpec("loop_divergence", "acceptance-loops", ns=[1000, 10_000, 100_000], trials=1000,
                          seed=SEED)
    rep = run(spec)
    freqs = [round(r.empirical, 4) for r in rep.rows if r.statistic == "p_loop"]
    inc, sep = rep.find("p_loop_increasing"), rep.find("p_loop_separation_z")
    ok = bool(inc.passed) and sep.empirical >= 3
    record(11, ok, f"p_loop={freqs} separation_z={sep.empirical:.2f}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
