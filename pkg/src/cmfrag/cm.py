"""Configuration-model sampling and the exhaustive-matching oracle."""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable

import numpy as np

from .degseq import DegreeSequence
from .multigraph import Multigraph, count_cycles, extract_fragment

DEFAULT_ORACLE_BOUND = 14
DEFAULT_MAX_TRIES = 10_000


def trial_rng(master_seed: int, experiment_id: str, trial: int) -> np.random.Generator:
    """Independent stream for trial ``trial`` of experiment ``experiment_id``."""
    key = zlib.crc32(experiment_id.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, key, trial])))


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _require_even(d: DegreeSequence) -> None:
    if d.half_edges % 2:
        raise ValueError("odd number of half-edges")


@dataclass
class MatchingSampler:
    """Uniform perfect matchings of the half-edges of ``d`` from one RNG stream."""

    d: DegreeSequence
    rng: np.random.Generator

    def __post_init__(self):
        _require_even(self.d)

    def draw(self) -> np.ndarray:
        """One matching as an ``(m/2, 2)`` array of half-edge pairs."""
        return self.rng.permutation(self.d.half_edges).reshape(-1, 2)

    def draw_many(self, size: int) -> np.ndarray:
        """``size`` independent matchings, shape ``(size, m/2, 2)``."""
        m = self.d.half_edges
        base = np.broadcast_to(np.arange(m, dtype=np.int64), (size, m))
        return self.rng.permuted(base, axis=1).reshape(size, m // 2, 2)

    def sample(self) -> Multigraph:
        d = self.d
        return Multigraph(d.n, d.owner[self.draw()])


def sample_cm(d: DegreeSequence, seed=None) -> Multigraph:
    """Underlying multigraph of a uniform matching; deterministic given ``seed``."""
    return MatchingSampler(d, as_rng(seed)).sample()


def sample_matchings(d: DegreeSequence, size: int, seed=None) -> np.ndarray:
    return MatchingSampler(d, as_rng(seed)).draw_many(size)


class SimpleSamplingFailure(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"no simple graph after {attempts} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class SimpleSample:
    graph: Multigraph
    attempts: int


def sample_simple(d: DegreeSequence, seed=None, max_tries: int = DEFAULT_MAX_TRIES) -> SimpleSample:
    """Rejection sampling of the configuration model until the result is simple."""
    sampler = MatchingSampler(d, as_rng(seed))
    for t in range(1, max_tries + 1):
        G = sampler.sample()
        if G.is_simple():
            return SimpleSample(G, t)
    raise SimpleSamplingFailure(max_tries)


# --------------------------------------------------------------------------
# exact oracle


def double_factorial_odd(m: int) -> int:
    """``(m-1)!!`` for even ``m``: the number of perfect matchings of ``m`` points."""
    out = 1
    for j in range(m - 1, 0, -2):
        out *= j
    return out


def all_matchings(m: int) -> np.ndarray:
    """Every perfect matching of ``0..m-1``, shape ``((m-1)!!, m/2, 2)``."""
    if m % 2:
        raise ValueError("m must be even")
    if m == 0:
        return np.zeros((1, 0, 2), dtype=np.int64)
    rows: list[list[int]] = []

    def rec(free: list[int], acc: list[int]):
        if not free:
            rows.append(acc[:])
            return
        a = free[0]
        for j in range(1, len(free)):
            acc.extend((a, free[j]))
            rec(free[1:j] + free[j + 1:], acc)
            del acc[-2:]

    rec(list(range(m)), [])
    return np.array(rows, dtype=np.int64).reshape(-1, m // 2, 2)


def matching_key(pairs) -> tuple[tuple[int, int], ...]:
    """Order-free representation of a matching."""
    p = np.sort(np.asarray(pairs).reshape(-1, 2), axis=1)
    return tuple(sorted(map(tuple, p.tolist())))


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of a statistic: value -> Fraction, summing to exactly 1."""

    probs: dict

    def __getitem__(self, key) -> Fraction:
        return self.probs.get(key, Fraction(0))

    def prob(self, pred: Callable[[Hashable], bool]) -> Fraction:
        return sum((p for k, p in self.probs.items() if pred(k)), Fraction(0))

    def expect(self, f: Callable[[Hashable], object] | None = None) -> Fraction:
        f = f or (lambda x: x)
        return sum((p * Fraction(f(k)) for k, p in self.probs.items()), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))


def _statistic(name_or_fn, d: DegreeSequence) -> Callable[[Multigraph], Hashable]:
    if callable(name_or_fn):
        return name_or_fn
    K = max(d.n, 1)
    table = {
        "is_simple": lambda G: G.is_simple(),
        "loops": lambda G: G.n_loops,
        "cycles": lambda G: tuple(count_cycles(G, K).counts.tolist()),
        "total_cycles": lambda G: count_cycles(G, K).total(),
        "fragment": lambda G: extract_fragment(G).code,
        "multigraph": lambda G: G.edge_key(),
    }
    try:
        return table[name_or_fn]
    except KeyError:
        raise ValueError(f"unknown statistic {name_or_fn!r}") from None


def enumerate_matchings(
    d: DegreeSequence, statistic="multigraph", bound: int = DEFAULT_ORACLE_BOUND
) -> ExactDistribution:
    """Exact distribution of ``statistic`` under the uniform matching.

    ``statistic`` is one of ``is_simple``, ``loops``, ``cycles``,
    ``total_cycles``, ``fragment``, ``multigraph``, ``matching`` or a callable
    on :class:`Multigraph`.
    """
    m = d.half_edges
    _require_even(d)
    if m > bound:
        raise ValueError(f"m_n={m} exceeds oracle bound {bound}")
    mats = all_matchings(m)
    total = mats.shape[0]
    if statistic == "matching":
        return ExactDistribution({matching_key(x): Fraction(1, total) for x in mats})
    # group matchings by the labeled multigraph they produce
    ends = np.sort(d.owner[mats], axis=2)
    counts: Counter = Counter()
    for row in ends:
        counts[tuple(sorted(map(tuple, row.tolist())))] += 1
    f = _statistic(statistic, d)
    out: Counter = Counter()
    for key, c in counts.items():
        out[f(Multigraph.from_edges(d.n, key))] += c
    return ExactDistribution({k: Fraction(c, total) for k, c in out.items()})
