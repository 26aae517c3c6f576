"""Degree sequences, limiting degree distributions and their moments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

LAMBDA_SUM_TOL = 1e-12
RHO2_TAIL_TOL = 1e-9


class InfeasibleSequenceError(ValueError):
    """Raised when a degree sequence violates a basic admissibility condition."""


@dataclass(frozen=True)
class DegreeSequence:
    """A degree sequence ``d_1..d_n`` with an even number of half-edges.

    Degrees are held as an int32 array; the half-edge count is int64.
    """

    degrees: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.degrees)
        if d.ndim != 1:
            raise ValueError("degrees must be one-dimensional")
        if d.size and d.min() < 0:
            raise InfeasibleSequenceError("degrees must be non-negative")
        d = d.astype(np.int32, copy=True)
        d.setflags(write=False)
        object.__setattr__(self, "degrees", d)
        if self.half_edges % 2:
            raise InfeasibleSequenceError(
                f"sum of degrees is odd ({self.half_edges})"
            )

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "DegreeSequence":
        """Build the sorted sequence with ``counts[k]`` vertices of degree ``k``."""
        ks = sorted(int(k) for k in counts)
        parts = [np.full(int(counts[k]), k, dtype=np.int32) for k in ks]
        if not parts:
            return cls(np.zeros(0, dtype=np.int32))
        return cls(np.concatenate(parts))

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @cached_property
    def half_edges(self) -> int:
        return int(self.degrees.sum(dtype=np.int64))

    @cached_property
    def counts(self) -> dict[int, int]:
        ks, cs = np.unique(self.degrees, return_counts=True)
        return {int(k): int(c) for k, c in zip(ks, cs)}

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def offsets(self) -> np.ndarray:
        """``offsets[v]`` is the index of the first half-edge of vertex ``v``."""
        off = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=off[1:])
        return off

    @cached_property
    def owner(self) -> np.ndarray:
        """Vertex owning each half-edge (0-based half-edges, in vertex order)."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, DegreeSequence):
            return NotImplemented
        return np.array_equal(self.degrees, other.degrees)

    def __hash__(self) -> int:
        return hash(self.degrees.tobytes())

    def __repr__(self) -> str:
        if self.n <= 12:
            return f"DegreeSequence({self.degrees.tolist()})"
        return f"DegreeSequence(n={self.n}, m={self.half_edges}, counts={self.counts})"


@dataclass(frozen=True)
class MomentSummary:
    rho1_n: float
    rho2_n: float
    nu_n: float | None
    lambda_hat_n: float
    max_degree: int


def moments(d: DegreeSequence) -> MomentSummary:
    """First two factorial moments of the empirical degree distribution.

    ``nu_n`` is ``None`` when the sequence has no half-edges.
    """
    if d.n < 1:
        raise ValueError("need at least one vertex")
    deg = d.degrees.astype(np.int64)
    s1 = int(deg.sum())
    s2 = int((deg * (deg - 1)).sum())
    hat = int((deg >= 2).sum())
    rho1 = s1 / d.n
    rho2 = s2 / d.n
    return MomentSummary(
        rho1_n=rho1,
        rho2_n=rho2,
        nu_n=(s2 / s1) if s1 > 0 else None,
        lambda_hat_n=hat / d.n,
        max_degree=d.max_degree,
    )


def factorial_moment(d: DegreeSequence, k: int) -> float:
    """``(1/n) * sum_v d_v (d_v - 1) ... (d_v - k + 1)``."""
    deg = d.degrees.astype(np.float64)
    acc = np.ones_like(deg)
    for j in range(k):
        acc *= deg - j
    return float(acc.sum() / d.n)


def is_feasible(d: DegreeSequence | Sequence[int]) -> bool:
    """Erdos-Gallai test: does a simple graph with these degrees exist?"""
    deg = np.sort(np.asarray(getattr(d, "degrees", d), dtype=np.int64))[::-1]
    n = deg.size
    if n == 0:
        return True
    if deg[-1] < 0 or int(deg.sum()) % 2:
        return False
    if deg[0] >= n:
        return False
    prefix = np.cumsum(deg)
    for k in range(1, n + 1):
        rhs = k * (k - 1) + int(np.minimum(deg[k:], k).sum())
        if prefix[k - 1] > rhs:
            return False
    return True


@dataclass(frozen=True)
class DegreeModel:
    """Limiting degree distribution ``P(D = k) = lambdas[k]``.

    Probabilities may be floats or :class:`fractions.Fraction`; rational input
    keeps every derived moment exact.
    """

    lambdas: Mapping[int, Number]
    truncation: int | None = None

    def __post_init__(self):
        lam = {int(k): v for k, v in self.lambdas.items() if v != 0}
        if any(k < 0 for k in lam):
            raise ValueError("degrees must be non-negative")
        if any(v < 0 for v in lam.values()):
            raise ValueError("probabilities must be non-negative")
        total = sum(lam.values())
        if abs(float(total) - 1.0) > LAMBDA_SUM_TOL:
            raise ValueError(f"lambdas sum to {float(total)!r}, not 1")
        object.__setattr__(self, "lambdas", dict(sorted(lam.items())))

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "DegreeModel":
        n = sum(counts.values())
        return cls({k: Fraction(c, n) for k, c in counts.items() if c})

    @classmethod
    def poisson(cls, mean: float, k_max: int | None = None) -> "DegreeModel":
        """Poisson(mean) truncated at ``k_max`` and renormalized.

        By default ``k_max`` is the first cutoff whose discarded share of the
        second factorial moment is below 1e-9.
        """
        if mean <= 0:
            raise ValueError("mean must be positive")
        if k_max is None:
            k_max = _poisson_cutoff(mean)
        ks = np.arange(k_max + 1)
        logp = ks * math.log(mean) - mean - np.array([math.lgamma(k + 1) for k in ks])
        p = np.exp(logp)
        p /= p.sum()
        return cls({int(k): float(v) for k, v in zip(ks, p) if v > 0}, truncation=k_max)

    @classmethod
    def from_json(cls, path_or_obj) -> "DegreeModel":
        obj = path_or_obj
        if isinstance(path_or_obj, (str, Path)):
            obj = json.loads(Path(path_or_obj).read_text())
        lam = {int(k): _parse_number(v) for k, v in obj["lambdas"].items()}
        k_max = obj.get("truncation")
        if k_max is not None:
            lam = {k: v for k, v in lam.items() if k <= int(k_max)}
            total = sum(lam.values())
            lam = {k: v / total for k, v in lam.items()}
        return cls(lam, truncation=k_max)

    def to_json(self) -> dict:
        return {
            "lambdas": {str(k): _dump_number(v) for k, v in self.lambdas.items()},
            "truncation": self.truncation,
        }

    @property
    def support(self) -> list[int]:
        return list(self.lambdas)

    @property
    def max_degree(self) -> int:
        return max(self.lambdas) if self.lambdas else 0

    def prob(self, k: int) -> Number:
        return self.lambdas.get(k, 0)

    def factorial_moment(self, r: int) -> Number:
        total = 0
        for k, p in self.lambdas.items():
            total += p * math.perm(k, r)
        return total

    @cached_property
    def rho1(self) -> Number:
        return self.factorial_moment(1)

    @cached_property
    def rho2(self) -> Number:
        return self.factorial_moment(2)

    @cached_property
    def nu(self) -> Number:
        if self.rho1 <= 0:
            raise ValueError("nu is undefined when E[D] = 0")
        return self.rho2 / self.rho1

    @property
    def lambda_hat(self) -> Number:
        return 1 - self.prob(0) - self.prob(1)

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.lambdas.values())

    def require_subcritical(self) -> float:
        nu = float(self.nu)
        if nu >= 1:
            raise ValueError(f"requires nu < 1, got nu = {nu:.6g}")
        return nu


def _poisson_cutoff(mean: float) -> int:
    # Tail of E[D(D-1)] beyond K equals mean^2 * P(Poisson > K - 2).
    pk = math.exp(-mean)
    cdf = pk
    j = 0
    while j < mean or mean**2 * (1.0 - cdf) >= RHO2_TAIL_TOL:
        j += 1
        pk *= mean / j
        cdf += pk
    return j + 2


def _parse_number(v) -> Number:
    if isinstance(v, str):
        return Fraction(v)
    return v


def _dump_number(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def realize(model: DegreeModel, n: int, policy: str = "largest_remainder") -> DegreeSequence:
    """A length-``n`` degree sequence whose counts track ``n * lambda_k``.

    ``policy`` is ``"largest_remainder"`` (floor, then hand the missing vertices
    to the largest fractional parts) or ``"round"`` (round each class, then fix
    the total on the largest classes). Only degrees in the model's support are
    used. An odd half-edge total is repaired by moving one vertex of the largest
    degree ``k`` with ``lambda_{k-1} > 0`` down to ``k - 1``; failing that, one
    vertex is moved up to ``k + 1``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    support = model.support
    exact = {k: Fraction(model.lambdas[k]) * n for k in support}
    if policy == "largest_remainder":
        counts = {k: math.floor(x) for k, x in exact.items()}
        order = sorted(support, key=lambda k: (-(exact[k] - counts[k]), k))
    elif policy == "round":
        counts = {k: round(x) for k, x in exact.items()}
        order = sorted(support, key=lambda k: (-exact[k], k))
    else:
        raise ValueError(f"unknown rounding policy {policy!r}")

    deficit = n - sum(counts.values())
    i = 0
    while deficit > 0:
        counts[order[i % len(order)]] += 1
        deficit -= 1
        i += 1
    i = 0
    while deficit < 0:
        k = order[-1 - (i % len(order))]
        if counts[k] > 0:
            counts[k] -= 1
            deficit += 1
        i += 1

    if sum(k * c for k, c in counts.items()) % 2:
        _fix_parity(counts, model)
    return DegreeSequence.from_counts({k: c for k, c in counts.items() if c})


def _fix_parity(counts: dict[int, int], model: DegreeModel) -> None:
    for k in sorted(counts, reverse=True):
        if counts[k] >= 1 and model.prob(k - 1) > 0:
            counts[k] -= 1
            counts[k - 1] = counts.get(k - 1, 0) + 1
            return
    for k in sorted(counts, reverse=True):
        if counts[k] >= 1 and model.prob(k + 1) > 0:
            counts[k] -= 1
            counts[k + 1] = counts.get(k + 1, 0) + 1
            return
    raise InfeasibleSequenceError(
        "cannot make the half-edge total even without leaving the model's support"
    )


def read_degree_file(path: str | Path) -> DegreeSequence:
    """Plain text (one degree per line) or JSON ``{"counts": {"k": n_k}}``."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = json.loads(text)
        return DegreeSequence.from_counts({int(k): int(v) for k, v in obj["counts"].items()})
    vals = [int(line.split("#", 1)[0]) for line in text.splitlines()
            if line.split("#", 1)[0].strip()]
    return DegreeSequence(np.array(vals, dtype=np.int32))


def write_degree_file(d: DegreeSequence, path: str | Path, fmt: str = "text") -> None:
    if fmt == "json":
        Path(path).write_text(json.dumps({"counts": {str(k): c for k, c in d.counts.items()}}))
    else:
        Path(path).write_text("".join(f"{x}\n" for x in d.degrees.tolist()))
