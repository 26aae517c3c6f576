"""Offspring laws, forest generators and the limiting-fragment sampler."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .cm import as_rng
from .degseq import DegreeModel
from .multigraph import Fragment, component_code, tree_children, tree_from_children

DEFAULT_CAP = 10**6
XI_CUTOFF = 1e-15

# An ordered rooted tree: the tuple of its children, in label order.
Node = tuple


class ForestOverflow(RuntimeError):
    """A generated forest exceeded its vertex cap."""


def _pmf_array(d: dict[int, Fraction | float]) -> np.ndarray:
    if not d:
        return np.zeros(1)
    out = np.zeros(max(d) + 1)
    for k, v in d.items():
        out[k] = float(v)
    return out


@dataclass(frozen=True)
class OffspringModel:
    """The degree law ``D``, its size-biased shift ``D̂`` and the cycle-root law ``D̃``.

    P(D̂ = i-1) = i λ_i / ρ₁ and P(D̃ = i-2) = i(i-1) λ_i / ρ₂.
    """

    model: DegreeModel

    @cached_property
    def d_exact(self) -> dict[int, Fraction | float]:
        return dict(self.model.lambdas)

    @cached_property
    def dhat_exact(self) -> dict[int, Fraction | float]:
        r1 = self.model.rho1
        if not r1:
            raise ValueError("rho1 = 0: size-biased law undefined")
        return {i - 1: i * lam / r1 for i, lam in self.model.lambdas.items() if i >= 1}

    @cached_property
    def dtilde_exact(self) -> dict[int, Fraction | float]:
        r2 = self.model.rho2
        if not r2:
            raise ValueError("rho2 = 0: cycle-root law undefined")
        return {i - 2: i * (i - 1) * lam / r2 for i, lam in self.model.lambdas.items() if i >= 2}

    @cached_property
    def d(self) -> np.ndarray:
        return _pmf_array(self.d_exact)

    @cached_property
    def dhat(self) -> np.ndarray:
        return _pmf_array(self.dhat_exact)

    @cached_property
    def dtilde(self) -> np.ndarray:
        return _pmf_array(self.dtilde_exact)

    @property
    def mean_dhat(self) -> float:
        return float(np.dot(np.arange(self.dhat.size), self.dhat))

    def law(self, name) -> np.ndarray:
        if isinstance(name, str):
            try:
                return {"D": self.d, "Dhat": self.dhat, "Dtilde": self.dtilde}[name]
            except KeyError:
                raise ValueError(f"unknown law {name!r}") from None
        return np.asarray(name, dtype=float)


def _pmf_at(pmf: np.ndarray, c: int) -> float:
    return float(pmf[c]) if c < pmf.size else 0.0


# --------------------------------------------------------------------------
# lexicographically labeled forests


@dataclass(frozen=True)
class LLForest:
    """Rooted forest with ordered children; vertex labels are implied by order.

    Root ``r`` (1-based) has label ``r``; the ``j``-th child of label ``l`` has
    label ``l`` followed by ``j``.
    """

    roots: tuple[Node, ...]

    @property
    def k(self) -> int:
        return len(self.roots)

    @cached_property
    def root_census(self) -> dict[int, int]:
        """``f^r_i``: roots with ``i`` children."""
        out: dict[int, int] = {}
        for r in self.roots:
            out[len(r)] = out.get(len(r), 0) + 1
        return out

    @cached_property
    def census(self) -> dict[int, int]:
        """``f_i``: non-root vertices of degree ``i`` (children + 1)."""
        out: dict[int, int] = {}
        stack = [c for r in self.roots for c in r]
        while stack:
            v = stack.pop()
            out[len(v) + 1] = out.get(len(v) + 1, 0) + 1
            stack.extend(v)
        return out

    @property
    def n_vertices(self) -> int:
        return self.k + sum(self.census.values())

    def labels(self) -> list[str]:
        """Vertex labels in depth-first order, components separated by '.'."""
        out = []

        def walk(v, lab):
            out.append(lab)
            for j, c in enumerate(v, 1):
                walk(c, f"{lab}.{j}")

        for r, v in enumerate(self.roots, 1):
            walk(v, str(r))
        return out

    def codes(self) -> tuple[str, ...]:
        """Unlabeled AHU code of each tree."""
        return tuple(node_code(r) for r in self.roots)

    @classmethod
    def from_codes(cls, codes: Sequence[str]) -> "LLForest":
        return cls(tuple(code_node(c) for c in codes))


def node_code(v: Node) -> str:
    return tree_from_children(node_code(c) for c in v)


def code_node(code: str) -> Node:
    return tuple(code_node(c) for c in tree_children(code))


def p_tree(F: LLForest, offspring: OffspringModel, root_law="Dtilde") -> float:
    """prod_roots P(D_r = children) * prod_non-roots P(D̂ = children)."""
    root = offspring.law(root_law)
    p = 1.0
    for c, cnt in F.root_census.items():
        p *= _pmf_at(root, c) ** cnt
    for i, cnt in F.census.items():
        p *= _pmf_at(offspring.dhat, i - 1) ** cnt
    return p


# --------------------------------------------------------------------------
# samplers


class _Pool:
    """Pre-drawn inversion samples from a finite pmf, refilled on demand."""

    def __init__(self, pmf: np.ndarray, rng: np.random.Generator, chunk: int = 65536):
        cdf = np.cumsum(pmf)
        self.cdf = cdf / cdf[-1]
        self.rng = rng
        self.chunk = chunk
        self.buf: list[int] = []
        self.pos = 0

    def next(self) -> int:
        if self.pos >= len(self.buf):
            u = self.rng.random(self.chunk)
            self.buf = np.searchsorted(self.cdf, u, side="right").tolist()
            self.pos = 0
        v = self.buf[self.pos]
        self.pos += 1
        return v


def _grow(first: int, pool: _Pool, budget: list[int]) -> str:
    """AHU code of a tree whose root has ``first`` children, others drawn from ``pool``."""
    # iterative post-order to avoid recursion limits on long paths
    stack = [[first, []]]
    while True:
        top = stack[-1]
        if len(top[1]) < top[0]:
            budget[0] -= 1
            if budget[0] < 0:
                raise ForestOverflow("vertex cap exceeded")
            stack.append([pool.next(), []])
            continue
        code = tree_from_children(top[1])
        stack.pop()
        if not stack:
            return code
        stack[-1][1].append(code)


def _grow_node(first: int, pool: _Pool, budget: list[int]) -> Node:
    stack = [[first, []]]
    while True:
        top = stack[-1]
        if len(top[1]) < top[0]:
            budget[0] -= 1
            if budget[0] < 0:
                raise ForestOverflow("vertex cap exceeded")
            stack.append([pool.next(), []])
            continue
        node = tuple(top[1])
        stack.pop()
        if not stack:
            return node
        stack[-1][1].append(node)


def sample_forest(
    k: int, offspring: OffspringModel, root_law="Dtilde", seed=None, cap: int = DEFAULT_CAP
) -> LLForest:
    """``k`` independent trees: root offspring from ``root_law``, others from D̂."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    rng = as_rng(seed)
    roots_pool = _Pool(offspring.law(root_law), rng, chunk=max(k, 1))
    pool = _Pool(offspring.dhat, rng)
    budget = [cap - k]
    if budget[0] < 0:
        raise ForestOverflow("vertex cap exceeded")
    return LLForest(tuple(_grow_node(roots_pool.next(), pool, budget) for _ in range(k)))


def cycle_lengths(nu: float, cutoff: float = XI_CUTOFF) -> int:
    """Largest ``k`` with ``nu^k / 2k >= cutoff``."""
    if nu <= 0:
        return 0
    k = 1
    while nu ** (k + 1) / (2 * (k + 1)) >= cutoff:
        k += 1
    return k if nu / 2 >= cutoff else 0


@dataclass
class LimitFragmentSampler:
    """Draws fragments from the limiting law: Poisson cycles with grafted trees."""

    model: DegreeModel
    rng: np.random.Generator
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        nu = self.model.require_subcritical()
        self.offspring = OffspringModel(self.model)
        K = cycle_lengths(nu)
        self.xis = np.array([nu**k / (2 * k) for k in range(1, K + 1)])
        self.root_pool = _Pool(self.offspring.dtilde, self.rng)
        self.pool = _Pool(self.offspring.dhat, self.rng)
        self.overflows = 0

    def _build(self, counts: np.ndarray) -> Fragment | None:
        comps = []
        budget = [self.cap]
        try:
            for k_idx in np.flatnonzero(counts):
                k = int(k_idx) + 1
                for _ in range(int(counts[k_idx])):
                    budget[0] -= k
                    if budget[0] < 0:
                        raise ForestOverflow("vertex cap exceeded")
                    trees = [_grow(self.root_pool.next(), self.pool, budget) for _ in range(k)]
                    comps.append(component_code(trees))
        except ForestOverflow:
            self.overflows += 1
            return None
        return Fragment(tuple(comps))

    def draw(self, size: int) -> list[Fragment | None]:
        """``size`` fragments; ``None`` marks a draw that hit the vertex cap."""
        if not self.xis.size:
            return [Fragment(())] * size
        a = self.rng.poisson(self.xis, size=(size, self.xis.size))
        empty = Fragment(())
        nz = a.any(axis=1)
        out: list[Fragment | None] = [empty] * size
        for i in np.flatnonzero(nz):
            out[i] = self._build(a[i])
        return out


def sample_limit_fragment(model: DegreeModel, seed=None, cap: int = DEFAULT_CAP) -> Fragment:
    frag = LimitFragmentSampler(model, as_rng(seed), cap).draw(1)[0]
    if frag is None:
        raise ForestOverflow("vertex cap exceeded")
    return frag


def sample_limit_fragments(
    model: DegreeModel, size: int, seed=None, cap: int = DEFAULT_CAP
) -> tuple[list[Fragment | None], int]:
    """Batch version; returns the draws and the overflow count."""
    s = LimitFragmentSampler(model, as_rng(seed), cap)
    out = s.draw(size)
    return out, s.overflows


def forest_mass(offspring: OffspringModel, k: int, max_vertices: int, root_law="Dtilde") -> float:
    """Total ``p_tree`` of all ``k``-root forests with at most ``max_vertices`` vertices.

    Computed through the total-progeny distribution by convolution, so it does
    not enumerate forests explicitly.
    """
    root = offspring.law(root_law)
    dh = offspring.dhat
    V = max_vertices
    # t[s]: P(a D̂-tree has exactly s vertices), s <= V
    t = np.zeros(V + 1)
    # powers[j][s]: P(j iid D̂-trees have s vertices in total)
    t_pow = [np.zeros(V + 1) for _ in range(dh.size)]
    t_pow[0][0] = 1.0
    for s in range(1, V + 1):
        # a tree of size s: root + children totalling s-1
        t[s] = sum(dh[j] * t_pow[j][s - 1] for j in range(dh.size))
        for j in range(1, dh.size):
            t_pow[j][s] = sum(t_pow[j - 1][s - u] * t[u] for u in range(1, s + 1))
    # a rooted tree with root law: 1 + children
    r = np.zeros(V + 1)
    kids = [np.zeros(V + 1) for _ in range(max(root.size, 1))]
    kids[0][0] = 1.0
    for j in range(1, root.size):
        kids[j] = np.convolve(kids[j - 1], t)[: V + 1]
    for j in range(root.size):
        r[1:] += root[j] * kids[j][:-1]
    f = np.zeros(V + 1)
    f[0] = 1.0
    for _ in range(k):
        f = np.convolve(f, r)[: V + 1]
    return float(f.sum())


def extinction_frequency(offspring: OffspringModel, runs: int, seed=None, cap: int = 10_000) -> float:
    """Share of single-root D̂ trees that die out before reaching ``cap`` vertices."""
    rng = as_rng(seed)
    pool = _Pool(offspring.dhat, rng)
    done = 0
    for _ in range(runs):
        try:
            _grow(pool.next(), pool, [cap])
            done += 1
        except ForestOverflow:
            pass
    return done / runs

