"""Partial-sum sets of fragment probabilities and the nu0 phase transition.

For a summable non-increasing sequence p_1 >= p_2 >= ... the set of subset
sums is an interval iff p_i <= t_i := sum_{j>i} p_j for every i. Here the
sequence is the simple-fragment law p(G). Fragments with p >= floor form the
head; everything below is the tail of mass T. The computed union

    U = union over head subsets A of [sigma_A, sigma_A + T]

contains every partial sum, and every point of U lies within ``floor`` of a
partial sum because tail subset sums leave no gap wider than a tail term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .degseq import DegreeModel
from .fragcat import FragmentCatalogue, enumerate_fragments
from .limits import Q as Q_of
from .limits import solve_nu0

SEAM = 1e-12
MAX_INTERVALS = 2**25
DEFAULT_EPS = 1e-6


class IntervalExplosion(RuntimeError):
    """The interval union grew past the configured cap."""


@dataclass(frozen=True)
class KakeyaResult:
    full_interval: bool
    first_violation: int | None  # 1-based


def _tails(ps: np.ndarray, tail: float) -> np.ndarray:
    # t_i = tail + sum_{j>i} p_j, summed from the small end
    rev = np.cumsum(ps[::-1])[::-1]
    return np.concatenate([rev[1:], [0.0]]) + tail


def kakeya_check(ps: Sequence[float], tails: Sequence[float] | float = 0.0) -> KakeyaResult:
    """Check p_i <= t_i for all i.

    ``tails`` is either the per-index tails ``t_i`` or the scalar mass beyond
    the last listed term.
    """
    ps = np.asarray(ps, dtype=float)
    if ps.size and (np.any(np.diff(ps) > 0) or ps.min() < 0):
        raise ValueError("ps must be non-negative and sorted descending")
    if np.ndim(tails) == 0:
        t = _tails(ps, float(tails))
    else:
        t = np.asarray(tails, dtype=float)
        if t.shape != ps.shape:
            raise ValueError("tails must match ps")
        if ps.size > 1 and not np.allclose(t[:-1] - t[1:], ps[1:], rtol=1e-9, atol=1e-15):
            raise ValueError("tails inconsistent with t_i = t_{i-1} - p_i")
    bad = np.flatnonzero(ps > t * (1 + 1e-12) + 1e-300)
    if bad.size:
        return KakeyaResult(False, int(bad[0]) + 1)
    return KakeyaResult(True, None)


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted disjoint closed intervals, stored as an ``(r, 2)`` array."""

    intervals: np.ndarray
    eps: float = 0.0

    def __len__(self) -> int:
        return int(self.intervals.shape[0])

    def contains(self, x: float, tol: float = 0.0) -> bool:
        iv = self.intervals
        j = int(np.searchsorted(iv[:, 0], x + tol, side="right")) - 1
        return j >= 0 and x <= iv[j, 1] + tol

    def gaps(self, lo: float = 0.0, hi: float = 1.0, tol: float = SEAM) -> list[tuple[float, float]]:
        """Open gaps of the union inside ``[lo, hi]`` wider than ``tol``."""
        out = []
        prev = lo
        for a, b in self.intervals.tolist():
            if a > prev + tol:
                out.append((prev, a))
            prev = max(prev, b)
        if prev < hi - tol:
            out.append((prev, hi))
        return out

    def is_full(self, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-9) -> bool:
        iv = self.intervals
        return bool(len(self) == 1 and iv[0, 0] <= lo + tol and iv[0, 1] >= hi - tol)

    def reflected(self) -> "IntervalUnion":
        iv = 1.0 - self.intervals[::-1, ::-1]
        return IntervalUnion(iv, self.eps)

    def is_symmetric(self, tol: float) -> bool:
        r = self.reflected()
        if len(r) != len(self):
            return False
        return bool(np.all(np.abs(r.intervals - self.intervals) <= tol))

    def fattened(self, delta: float) -> "IntervalUnion":
        return IntervalUnion(_merge(self.intervals + [-delta, delta], SEAM), self.eps)

    def covers(self, other: "IntervalUnion", tol: float = 0.0) -> bool:
        """Whether every interval of ``other`` lies inside one of ours."""
        for a, b in other.intervals.tolist():
            iv = self.intervals
            j = int(np.searchsorted(iv[:, 0], a + tol, side="right")) - 1
            if j < 0 or iv[j, 1] + tol < b:
                return False
        return True

    def tolist(self) -> list[list[float]]:
        return self.intervals.tolist()


def _merge(iv: np.ndarray, seam: float) -> np.ndarray:
    if iv.shape[0] <= 1:
        return iv
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    starts = iv[:, 0]
    ends = np.maximum.accumulate(iv[:, 1])
    new = np.empty(len(iv), dtype=bool)
    new[0] = True
    new[1:] = starts[1:] > ends[:-1] + seam
    idx = np.flatnonzero(new)
    last = np.concatenate([idx[1:] - 1, [len(iv) - 1]])
    return np.column_stack([starts[idx], ends[last]])


def partial_sum_union(
    head: Sequence[float], tail: float, seam: float = SEAM, max_intervals: int = MAX_INTERVALS
) -> IntervalUnion:
    """Union over subsets A of the head of [sigma_A, sigma_A + tail]."""
    iv = np.array([[0.0, float(tail)]])
    for p in np.asarray(head, dtype=float)[::-1]:
        iv = _merge(np.vstack([iv, iv + p]), seam)
        if len(iv) > max_intervals:
            raise IntervalExplosion(
                f"more than {max_intervals} intervals; retry with a coarser resolution"
            )
    return IntervalUnion(iv)


def harmonic_partial(K: int) -> float:
    """sum_{j=3}^{K-2} 1/j."""
    return math.fsum(1.0 / j for j in range(3, K - 1))


def safe_tail_index(model_or_nu) -> int:
    """Smallest K with sum_{j=3}^{K-2} 1/j >= 4/nu."""
    nu = float(model_or_nu.nu) if isinstance(model_or_nu, DegreeModel) else float(model_or_nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    target = 4.0 / nu
    K, s = 4, 0.0
    # s tracks sum_{j=3}^{K-2} 1/j
    while True:
        if s >= target:
            return K
        K += 1
        s += 1.0 / (K - 2)
        if K > 10**9:
            raise ValueError("nu too small")


def _nu_value(model_or_nu) -> float:
    return float(model_or_nu.nu) if isinstance(model_or_nu, DegreeModel) else float(model_or_nu)


def threshold_report(model_or_nu) -> dict:
    nu = _nu_value(model_or_nu)
    nu0 = solve_nu0(1e-12)
    q = Q_of(nu) if nu < 1 else 0.0
    full = nu >= 1 or q <= 0.5
    return {"nu": nu, "nu0": nu0, "Q": q, "verdict": "full" if full else "gap"}


@dataclass(frozen=True)
class GapCertificate:
    i: int  # 1-based index into the head
    p_i: float
    tail: float

    @property
    def gap(self) -> tuple[float, float]:
        return (self.tail, self.p_i)

    def to_dict(self) -> dict:
        return {"i": self.i, "p_i": self.p_i, "tail": self.tail}


@dataclass(frozen=True)
class KakeyaReport:
    nu: float
    nu0: float
    Q: float
    verdict: str
    union: IntervalUnion
    gaps: list[GapCertificate]
    floor: float
    K_star: int
    head_size: int
    tail_mass: float
    threshold_verdict: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "nu0": self.nu0,
            "Q": self.Q,
            "verdict": self.verdict,
            "intervals": self.union.tolist(),
            "gaps": [g.to_dict() for g in self.gaps],
            "floor": self.floor,
            "K_star": self.K_star,
            "head_size": self.head_size,
            "tail_mass": self.tail_mass,
            "threshold_verdict": self.threshold_verdict,
        }


def analyze(
    model: DegreeModel,
    eps: float = DEFAULT_EPS,
    catalogue: FragmentCatalogue | None = None,
    max_intervals: int = MAX_INTERVALS,
) -> KakeyaReport:
    """Closure of the limit-probability set at resolution ``eps``.

    The simple-fragment catalogue is built with floor ``eps``; the result is
    exact up to an ``eps``-fattening.
    """
    nu = float(model.nu)
    if not 0 < nu < 1:
        raise ValueError(f"analyze needs 0 < nu < 1, got {nu}")
    if catalogue is None:
        catalogue = enumerate_fragments(model, eps, variant="simple")
    if catalogue.variant != "simple":
        raise ValueError("analyze needs the simple-fragment catalogue")
    head = catalogue.probs
    T = max(catalogue.tail_mass, 0.0)
    union = partial_sum_union(head, T, max_intervals=max_intervals)
    t = _tails(head, T)
    bad = np.flatnonzero(head > t)
    certs = [GapCertificate(int(i) + 1, float(head[i]), float(t[i])) for i in bad]
    rep = threshold_report(nu)
    return KakeyaReport(
        nu=nu,
        nu0=rep["nu0"],
        Q=rep["Q"],
        verdict="full" if union.is_full(tol=eps) else "gap",
        union=IntervalUnion(union.intervals, eps),
        gaps=certs,
        floor=catalogue.floor,
        K_star=safe_tail_index(nu),
        head_size=len(head),
        tail_mass=T,
        threshold_verdict=rep["verdict"],
    )


def subset_sums(values: Sequence[float]) -> np.ndarray:
    """All 2^len(values) subset sums (small inputs only)."""
    out = np.zeros(1)
    for v in values:
        out = np.concatenate([out, out + v])
    return out
