from __future__ import annotations

import json
import math

import pytest

from cmfrag.degseq import DegreeModel, DegreeSequence
from cmfrag.fragcat import enumerate_fragments
from cmfrag.harness import (
    ExperimentSpec,
    Report,
    control_sequence,
    heavy_tail_sequence,
    run,
    tv_top,
)
from cmfrag.limits import expected_loops

MODEL = DegreeModel({1: 0.6, 2: 0.3, 3: 0.1})


def small_cycle_spec(workers=1) -> ExperimentSpec:
    return ExperimentSpec("cycle_law", "unit-cycles", ns=[300], trials=40, seed=5, model=MODEL, workers=workers)


def test_spec_roundtrip(tmp_path):
    spec = small_cycle_spec()
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(spec.to_dict()))
    back = ExperimentSpec.from_json(p)
    assert back.to_dict() == spec.to_dict()
    with pytest.raises(ValueError):
        ExperimentSpec("nope", "x")
    with pytest.raises(ValueError):
        ExperimentSpec("oracle", "x", trials=0)


def test_tolerance_override():
    spec = ExperimentSpec("oracle", "x", tolerances={"oracle_z": 5})
    assert spec.tol("oracle_z") == 5 and spec.tol("z") == 3


def test_cycle_law_deterministic_across_workers():
    a = run(small_cycle_spec(1)).to_dict()
    b = run(small_cycle_spec(2)).to_dict()
    assert a["rows"] == b["rows"]


def test_report_serialization():
    rep = run(small_cycle_spec())
    d = json.loads(rep.to_json())
    assert d["schema_version"] == 1
    stats = {r["statistic"] for r in d["rows"]}
    assert {"mean_X1", "dispersion_X1", "cov_X1_X2", "mean_total_cycles", "p_simple",
            "p_acyclic_given_simple"} <= stats
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("statistic,n,empirical") and len(lines) == len(rep.rows) + 1
    assert rep.find("mean_X1", 300).theoretical == pytest.approx(0.4)
    with pytest.raises(KeyError):
        rep.find("missing")


def test_oracle_run_small():
    spec = ExperimentSpec("oracle", "unit-oracle", trials=20_000, seed=1, degrees=DegreeSequence((2, 1, 1)))
    rep = run(spec)
    assert rep.passed
    assert rep.find("p_simple").theoretical == pytest.approx(2 / 3)
    assert rep.notes["matching_chi2"]["outcomes"] == 3


def test_fragment_law_small():
    m = DegreeModel({1: 0.76, 2: 0.2, 3: 0.04})
    spec = ExperimentSpec("fragment_law", "unit-frag", ns=[2000], trials=300, seed=2, model=m,
                          catalogue_floor=1e-3)
    rep = run(spec)
    row = rep.find("tv_fragment", 2000)
    assert 0 <= row.empirical < 0.2


def test_tv_top():
    m = DegreeModel({1: 0.76, 2: 0.2, 3: 0.04})
    cat = enumerate_fragments(m, 1e-3)
    tv, detail = tv_top(["E"] * 10, cat, 3)
    p0 = cat.entries[0].pstar
    assert cat.codes[0] == "E"
    assert tv == pytest.approx(1 - p0)
    assert detail["other"][0] == pytest.approx(0.0)


def test_heavy_tail_family():
    for n in (10**3, 10**4, 10**5):
        d = heavy_tail_sequence(n)
        assert d.n == n and d.half_edges % 2 == 0
        assert d.max_degree == math.floor(n**0.4) < math.sqrt(n)
    # the expected loop count grows without bound
    e = [expected_loops(heavy_tail_sequence(n)) for n in (10**3, 10**4, 10**5)]
    assert e[0] < e[1] < e[2]
    assert expected_loops(control_sequence(10**4)) == pytest.approx(0.5 * 2 / 3, rel=1e-2)


def test_loop_divergence_small():
    spec = ExperimentSpec("loop_divergence", "unit-loops", ns=[100, 1000], trials=300, seed=3)
    rep = run(spec)
    assert isinstance(rep, Report)
    assert {r.statistic for r in rep.rows} >= {"p_loop", "p_loop_increasing", "p_loop_separation_z"}
