"""Seeded experiment runners that confront limit laws with samples and oracles."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats

from . import limits
from .branching import sample_limit_fragments
from .cm import MatchingSampler, enumerate_matchings, trial_rng
from .degseq import DegreeModel, DegreeSequence, moments, realize
from .fragcat import FragmentCatalogue, enumerate_fragments
from .multigraph import classify_components, count_cycles, extract_fragment

SCHEMA_VERSION = 1
KINDS = ("cycle_law", "fragment_law", "oracle", "loop_divergence", "limit_sampler")

DEFAULT_TOLERANCES = {
    "z": 3.0,
    "oracle_z": 4.0,
    "tv": 0.02,
    "complex_freq": 0.01,
    "dispersion_lo": 0.8,
    "dispersion_hi": 1.2,
    "total_cycles_rel": 0.05,
    "separation_z": 3.0,
}


@dataclass
class ExperimentSpec:
    kind: str
    experiment_id: str
    ns: list[int] = field(default_factory=list)
    trials: int = 1000
    seed: int = 0
    model: DegreeModel | None = None
    degrees: DegreeSequence | None = None
    K: int = 4
    top_m: int = 20
    catalogue_floor: float = 1e-5
    tolerances: dict = field(default_factory=dict)
    workers: int = 1
    max_cycle_length: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def sequence(self, n: int | None) -> DegreeSequence:
        if self.degrees is not None:
            return self.degrees
        if self.model is None:
            raise ValueError("spec needs a model or a degree sequence")
        return realize(self.model, n)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "experiment_id": self.experiment_id,
            "ns": list(self.ns),
            "trials": self.trials,
            "seed": self.seed,
            "K": self.K,
            "top_m": self.top_m,
            "catalogue_floor": self.catalogue_floor,
            "tolerances": dict(sorted(self.tolerances.items())),
        }
        if self.model is not None:
            d["model"] = self.model.to_json()
        if self.degrees is not None:
            d["degrees"] = self.degrees.degrees.tolist()
        if self.max_cycle_length is not None:
            d["max_cycle_length"] = self.max_cycle_length
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        model = DegreeModel.from_json(d.pop("model")) if "model" in d else None
        degrees = DegreeSequence(d.pop("degrees")) if "degrees" in d else None
        return cls(model=model, degrees=degrees, **d)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class Row:
    statistic: str
    n: int | None
    empirical: float
    theoretical: float | None = None
    anchor: str = ""
    stderr: float | None = None
    z: float | None = None
    bound: float | None = None
    passed: bool | None = None


@dataclass
class Report:
    spec: dict
    rows: list[Row] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows if r.passed is not None)

    def find(self, statistic: str, n: int | None = None) -> Row:
        for r in self.rows:
            if r.statistic == statistic and (n is None or r.n == n):
                return r
        raise KeyError((statistic, n))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec,
            "passed": self.passed,
            "rows": [asdict(r) for r in self.rows],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(Row.__dataclass_fields__)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in cols])
        return buf.getvalue()


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(type(x))


def _z_row(stat, n, samples, theory, anchor, bound) -> Row:
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")
    z = (mean - theory) / se if se > 0 else (0.0 if mean == theory else math.inf)
    return Row(stat, n, mean, theory, anchor, se, z, bound, abs(z) <= bound)


def _prop_row(stat, n, hits: int, total: int, theory, anchor, bound) -> Row:
    emp = hits / total if total else float("nan")
    se = math.sqrt(theory * (1 - theory) / total) if total else float("nan")
    z = (emp - theory) / se if se > 0 else 0.0
    return Row(stat, n, emp, theory, anchor, se, z, bound, abs(z) <= bound)


def _run_trials(fn: Callable[[int], object], trials: int, workers: int) -> list:
    """Evaluate ``fn(t)`` for every trial index, results in index order."""
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(trials), chunksize=max(1, trials // (4 * workers))))


# --------------------------------------------------------------------------
# cycle law


def _cycle_trial(t: int, d: DegreeSequence, seed: int, eid: str, K: int, Kmax: int):
    G = MatchingSampler(d, trial_rng(seed, eid, t)).sample()
    counts = count_cycles(G, Kmax).counts
    return counts[:K].tolist(), int(counts.sum()), G.is_simple()


def run_cycle_law(spec: ExperimentSpec) -> Report:
    """Cycle counts, total cycles, simplicity and acyclicity against their limits."""
    nu = float(spec.model.nu) if spec.model is not None else float(limits_nu(spec.degrees))
    K = spec.K
    rep = Report(spec.to_dict())
    z = spec.tol("z")
    for n in spec.ns:
        d = spec.sequence(n)
        Kmax = spec.max_cycle_length or d.n
        fn = partial(_cycle_trial, d=d, seed=spec.seed, eid=f"{spec.experiment_id}:{n}", K=K, Kmax=Kmax)
        res = _run_trials(fn, spec.trials, spec.workers)
        X = np.array([r[0] for r in res], dtype=float)
        Z = np.array([r[1] for r in res], dtype=float)
        simple = np.array([r[2] for r in res], dtype=bool)
        for k in range(1, K + 1):
            xk = X[:, k - 1]
            rep.rows.append(_z_row(f"mean_X{k}", n, xk, limits.xi(k, nu), "Poisson cycle mean nu^k/(2k)", z))
            m = xk.mean()
            ratio = float(xk.var(ddof=1) / m) if m > 0 else float("nan")
            lo, hi = spec.tol("dispersion_lo"), spec.tol("dispersion_hi")
            rep.rows.append(Row(f"dispersion_X{k}", n, ratio, 1.0, "Poisson variance/mean = 1",
                                passed=bool(lo <= ratio <= hi), bound=hi))
        for k in range(1, K + 1):
            for l in range(k + 1, K + 1):
                a = X[:, k - 1] - X[:, k - 1].mean()
                b = X[:, l - 1] - X[:, l - 1].mean()
                prod = a * b
                cov = float(prod.sum() / (len(prod) - 1))
                se = float(prod.std(ddof=1) / math.sqrt(len(prod)))
                zz = cov / se if se > 0 else 0.0
                rep.rows.append(Row(f"cov_X{k}_X{l}", n, cov, 0.0, "independent Poisson limits",
                                    se, zz, z, abs(zz) <= z))
        ez = limits.expected_total_cycles(nu)
        rep.rows.append(_z_row("mean_total_cycles", n, Z, ez, "-1/2 ln(1-nu)", z))
        rel = abs(Z.mean() - ez) / ez if ez > 0 else 0.0
        rep.rows.append(Row("total_cycles_rel_err", n, rel, 0.0, "-1/2 ln(1-nu)",
                            bound=spec.tol("total_cycles_rel"), passed=rel <= spec.tol("total_cycles_rel")))
        rep.rows.append(_prop_row("p_simple", n, int(simple.sum()), len(simple),
                                  limits.prob_simple_limit(nu), "exp(-nu/2 - nu^2/4)", z))
        acyc = (Z == 0) & simple
        rep.rows.append(_prop_row("p_acyclic_given_simple", n, int(acyc.sum()), int(simple.sum()),
                                  limits.Q(nu), "sqrt(1-nu) exp(nu/2 + nu^2/4)", z))
    return rep


def limits_nu(d: DegreeSequence) -> float:
    nu = moments(d).nu_n
    if nu is None:
        raise ValueError("nu undefined for the all-zero sequence")
    return nu


# --------------------------------------------------------------------------
# fragment law


def _fragment_trial(t: int, d: DegreeSequence, seed: int, eid: str):
    G = MatchingSampler(d, trial_rng(seed, eid, t)).sample()
    return extract_fragment(G).code, classify_components(G).n_complex > 0, G.is_simple()


def tv_top(codes: list[str], catalogue: FragmentCatalogue, M: int) -> tuple[float, dict]:
    """Total variation over the top-``M`` catalogue entries plus an 'other' bucket."""
    top = catalogue.entries[:M]
    probs = {e.code: e.prob(catalogue.variant) for e in top}
    other = max(0.0, 1.0 - math.fsum(probs.values()))
    cnt = Counter(codes)
    N = len(codes)
    emp = {c: cnt.get(c, 0) / N for c in probs}
    emp_other = 1.0 - math.fsum(emp.values())
    tv = 0.5 * (math.fsum(abs(emp[c] - probs[c]) for c in probs) + abs(emp_other - other))
    return tv, {"empirical": emp, "theoretical": probs, "other": [emp_other, other]}


def run_fragment_law(spec: ExperimentSpec, catalogue: FragmentCatalogue | None = None,
                     simple_catalogue: FragmentCatalogue | None = None) -> Report:
    model = spec.model
    model.require_subcritical()
    cat = catalogue or enumerate_fragments(model, spec.catalogue_floor)
    scat = simple_catalogue or enumerate_fragments(model, spec.catalogue_floor, "simple")
    rep = Report(spec.to_dict())
    M = spec.top_m
    for n in spec.ns:
        d = spec.sequence(n)
        fn = partial(_fragment_trial, d=d, seed=spec.seed, eid=f"{spec.experiment_id}:{n}")
        res = _run_trials(fn, spec.trials, spec.workers)
        codes = [r[0] for r in res]
        tv, detail = tv_top(codes, cat, M)
        rep.rows.append(Row("tv_fragment", n, tv, 0.0, "p*(H) = sqrt(1-nu)/authe(H) prod (lambda_i i!/rho1)^h_i",
                            bound=spec.tol("tv"), passed=tv < spec.tol("tv")))
        cx = sum(r[1] for r in res) / len(res)
        rep.rows.append(Row("complex_freq", n, cx, 0.0, "no complex components in the limit",
                            bound=spec.tol("complex_freq"), passed=cx < spec.tol("complex_freq")))
        scodes = [r[0] for r in res if r[2]]
        if scodes:
            stv, _ = tv_top(scodes, scat, M)
            # the conditional sample is smaller, so scale the bound by sqrt(N / N_simple)
            b = spec.tol("tv") * math.sqrt(len(codes) / len(scodes))
            rep.rows.append(Row("tv_fragment_given_simple", n, stv, 0.0,
                                "p(G) = Q(nu)/aut(G) prod (lambda_i i!/rho1)^g_i", bound=b, passed=stv < b))
        sizes = Counter(sum(1 for _ in c.split("(")) - 1 if c != "E" else 0 for c in codes)
        rep.notes[f"fragment_size_hist_{n}"] = dict(sorted(sizes.items()))
        rep.notes[f"tv_detail_{n}"] = detail
    return rep


def run_limit_sampler(spec: ExperimentSpec, catalogue: FragmentCatalogue | None = None) -> Report:
    """Limiting-fragment sampler against the catalogue."""
    model = spec.model
    nu = model.require_subcritical()
    cat = catalogue or enumerate_fragments(model, spec.catalogue_floor)
    frags, overflow = sample_limit_fragments(model, spec.trials, seed=trial_rng(spec.seed, spec.experiment_id, 0))
    codes = [f.code for f in frags if f is not None]
    rep = Report(spec.to_dict())
    tv, detail = tv_top(codes, cat, spec.top_m)
    rep.rows.append(Row("tv_limit_sampler", None, tv, 0.0, "Poisson cycles with D̃/D̂ trees",
                        bound=spec.tol("tv"), passed=tv < spec.tol("tv")))
    empty = sum(1 for c in codes if c == "E")
    rep.rows.append(_prop_row("p_empty", None, empty, len(codes), math.sqrt(1 - nu),
                              "sqrt(1-nu)", spec.tol("z")))
    rep.notes["overflows"] = overflow
    rep.notes["tv_detail"] = detail
    return rep


# --------------------------------------------------------------------------
# oracle equivalence


def _encode_rows(rows: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[1]):
        out = out * base + rows[:, j]
    return out


def run_oracle_equivalence(spec: ExperimentSpec) -> Report:
    """Sampler frequencies against exact matching and multigraph laws."""
    d = spec.degrees
    if d is None:
        raise ValueError("oracle experiments need an explicit degree sequence")
    m = d.half_edges
    rng = trial_rng(spec.seed, spec.experiment_id, 0)
    mats = MatchingSampler(d, rng).draw_many(spec.trials)
    N = spec.trials
    rep = Report(spec.to_dict())
    bound = spec.tol("oracle_z")

    def compare(label, keys_emp: np.ndarray, exact: dict):
        vals, cnt = np.unique(keys_emp, return_counts=True)
        emp = dict(zip(vals.tolist(), cnt.tolist()))
        zs, chi2 = [], 0.0
        for key, p in exact.items():
            p = float(p)
            e = N * p
            c = emp.pop(key, 0)
            z = (c - e) / math.sqrt(e * (1 - p)) if 0 < p < 1 else 0.0
            zs.append(z)
            chi2 += (c - e) ** 2 / e
        stray = sum(emp.values())
        dof = max(len(exact) - 1, 1)
        maxz = max((abs(z) for z in zs), default=0.0)
        ok = maxz <= bound and stray == 0
        rep.rows.append(Row(f"{label}_max_z", None, maxz, 0.0, "exhaustive matching enumeration",
                            bound=bound, passed=ok))
        rep.notes[f"{label}_chi2"] = {"chi2": chi2, "dof": dof, "p_value": float(stats.chi2.sf(chi2, dof)),
                                       "outcomes": len(exact), "stray": stray}

    # matching level: partner array encodes the matching
    rows = np.arange(N)[:, None]
    partner = np.empty((N, m), dtype=np.int64)
    partner[rows, mats[:, :, 0]] = mats[:, :, 1]
    partner[rows, mats[:, :, 1]] = mats[:, :, 0]
    exact_m = enumerate_matchings(d, "matching")
    ex = {}
    for key, p in exact_m.probs.items():
        part = np.empty(m, dtype=np.int64)
        for a, b in key:
            part[a], part[b] = b, a
        ex[int(_encode_rows(part[None, :], m)[0])] = p
    compare("matching", _encode_rows(partner, m), ex)

    # multigraph level: sorted owner pairs
    ends = np.sort(d.owner[mats], axis=2)
    codes = ends[:, :, 0] * d.n + ends[:, :, 1]
    codes.sort(axis=1)
    exact_g = enumerate_matchings(d, "multigraph")
    ex = {}
    for key, p in exact_g.probs.items():
        row = np.sort(np.array([u * d.n + v for u, v in key], dtype=np.int64))
        ex[int(_encode_rows(row[None, :], d.n * d.n)[0])] = p
    compare("multigraph", _encode_rows(codes, d.n * d.n), ex)

    # headline statistics
    loops = (ends[:, :, 0] == ends[:, :, 1]).sum(axis=1)
    el = float(enumerate_matchings(d, "loops").expect())
    rep.rows.append(_z_row("mean_loops", None, loops, el, "exact oracle", bound))
    dup = np.any(np.diff(codes, axis=1) == 0, axis=1) if codes.shape[1] > 1 else np.zeros(N, bool)
    simple = (loops == 0) & ~dup
    ps = float(enumerate_matchings(d, "is_simple")[True])
    if 0 < ps < 1:
        rep.rows.append(_prop_row("p_simple", None, int(simple.sum()), N, ps, "exact oracle", bound))
    else:
        rep.rows.append(Row("p_simple", None, float(simple.mean()), ps, "exact oracle",
                            passed=float(simple.mean()) == ps))
    return rep


# --------------------------------------------------------------------------
# loop divergence


def heavy_tail_sequence(n: int) -> DegreeSequence:
    """floor(sqrt n) hubs of degree floor(n^0.4) on a base of degrees 1 and 2.

    The hubs make E[D_n^2] grow like n^0.3, while the maximum degree stays o(sqrt n).
    """
    hubs = int(math.isqrt(n))
    delta = int(math.floor(n**0.4))
    rest = n - hubs
    ones = rest // 2
    twos = rest - ones
    degs = [delta] * hubs + [1] * ones + [2] * twos
    if sum(degs) % 2:
        degs[hubs] = 2  # turn one degree-1 vertex into degree 2
    return DegreeSequence(degs)


def control_sequence(n: int) -> DegreeSequence:
    ones = n // 2
    degs = [1] * ones + [2] * (n - ones)
    if sum(degs) % 2:
        degs[0] = 2
    return DegreeSequence(degs)


def _has_loop(t: int, d: DegreeSequence, seed: int, eid: str) -> bool:
    p = trial_rng(seed, eid, t).permutation(d.half_edges)
    own = d.owner
    return bool(np.any(own[p[0::2]] == own[p[1::2]]))


def run_loop_divergence(spec: ExperimentSpec, family: Callable[[int], DegreeSequence] = heavy_tail_sequence,
                        control: Callable[[int], DegreeSequence] | None = control_sequence) -> Report:
    rep = Report(spec.to_dict())
    freqs = []
    for n in spec.ns:
        d = family(n)
        fn = partial(_has_loop, d=d, seed=spec.seed, eid=f"{spec.experiment_id}:{n}")
        hits = sum(_run_trials(fn, spec.trials, spec.workers))
        p = hits / spec.trials
        se = math.sqrt(max(p * (1 - p), 1e-300) / spec.trials)
        freqs.append((n, p, se))
        rep.rows.append(Row("p_loop", n, p, None, "loop a.a.s. when E[D_n^2] diverges", se))
        rep.notes[f"E_loops_{n}"] = limits.expected_loops(d)
    inc = all(b[1] > a[1] for a, b in zip(freqs, freqs[1:]))
    rep.rows.append(Row("p_loop_increasing", None, float(inc), None, "", passed=inc))
    (_, p0, s0), (_, p1, s1) = freqs[0], freqs[-1]
    sep = (p1 - p0) / math.sqrt(s0**2 + s1**2)
    rep.rows.append(Row("p_loop_separation_z", None, sep, None, "", bound=spec.tol("separation_z"),
                        passed=sep >= spec.tol("separation_z")))
    if control is not None:
        for n in spec.ns:
            d = control(n)
            nu = limits_nu(d)
            fn = partial(_has_loop, d=d, seed=spec.seed, eid=f"{spec.experiment_id}:control:{n}")
            hits = sum(_run_trials(fn, spec.trials, spec.workers))
            theory = 1 - math.exp(-limits.xi(1, nu))
            rep.rows.append(_prop_row("p_loop_control", n, hits, spec.trials, theory,
                                      "1 - exp(-nu/2)", spec.tol("z")))
    return rep


RUNNERS = {
    "cycle_law": run_cycle_law,
    "fragment_law": run_fragment_law,
    "oracle": run_oracle_equivalence,
    "loop_divergence": run_loop_divergence,
    "limit_sampler": run_limit_sampler,
}


def run(spec: ExperimentSpec) -> Report:
    return RUNNERS[spec.kind](spec)
