"""Multigraphs produced by half-edge matchings, and their unicyclic fragments.

Fragment code grammar (ASCII, stable across runs)::

    fragment  := "E" | component ("+" component)*
    component := "C" k ":" tree{k}
    tree      := "(" tree* ")"

A component is a ``k``-cycle (``k = 1`` is a loop, ``k = 2`` a double edge) whose
``i``-th vertex carries the rooted tree ``tree_i``. Trees use the AHU encoding
with children sorted lexicographically; the tree sequence is the lexicographic
minimum over all rotations and reflections of the cycle; components are sorted.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .degseq import DegreeSequence

EMPTY_CODE = "E"
DEFAULT_CYCLE_BUDGET = 2_000_000


class CycleBudgetExceeded(RuntimeError):
    """Cycle enumeration visited more paths than the configured budget."""


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Labeled multigraph on vertices ``0..n-1``.

    ``edges`` holds one row ``(u, v)`` with ``u <= v`` per edge; parallel edges
    repeat and a loop is a row ``(v, v)``.
    """

    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        e = np.sort(e, axis=1)
        if e.size and (e.min() < 0 or e.max() >= self.n):
            raise ValueError("edge endpoint out of range")
        e.setflags(write=False)
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Multigraph":
        return cls(n, np.array(list(edges), dtype=np.int64).reshape(-1, 2))

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges[:, 0], minlength=self.n)
        deg += np.bincount(self.edges[:, 1], minlength=self.n)
        return deg

    @cached_property
    def loops(self) -> dict[int, int]:
        e = self.edges
        vs, cs = np.unique(e[e[:, 0] == e[:, 1], 0], return_counts=True)
        return {int(v): int(c) for v, c in zip(vs, cs)}

    @cached_property
    def mult(self) -> dict[tuple[int, int], int]:
        e = self.edges[self.edges[:, 0] != self.edges[:, 1]]
        if not e.size:
            return {}
        pairs, cs = np.unique(e, axis=0, return_counts=True)
        return {(int(u), int(v)): int(c) for (u, v), c in zip(pairs, cs)}

    @property
    def n_loops(self) -> int:
        e = self.edges
        return int(np.count_nonzero(e[:, 0] == e[:, 1]))

    def is_simple(self) -> bool:
        if self.n_loops:
            return False
        return all(c == 1 for c in self.mult.values())

    def edge_key(self) -> tuple[tuple[int, int], ...]:
        """Sorted edge multiset; equal keys mean equal labeled multigraphs."""
        return tuple(sorted(map(tuple, self.edges.tolist())))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return self.n == other.n and self.edge_key() == other.edge_key()

    def __hash__(self) -> int:
        return hash((self.n, self.edge_key()))

    def __repr__(self) -> str:
        return f"Multigraph(n={self.n}, edges={self.edge_key()})"

    @cached_property
    def _components(self) -> tuple[int, np.ndarray]:
        e = self.edges
        adj = coo_matrix(
            (np.ones(len(e), dtype=np.int8), (e[:, 0], e[:, 1])), shape=(self.n, self.n)
        )
        return connected_components(adj, directed=False)

    def edge_list_lines(self) -> list[str]:
        """``u v mult`` per vertex pair, loops as ``v v loops``."""
        lines = [f"{u} {v} {c}" for (u, v), c in sorted(self.mult.items())]
        lines += [f"{v} {v} {c}" for v, c in sorted(self.loops.items())]
        return sorted(lines, key=lambda s: tuple(map(int, s.split()[:2])))


def from_matching(d: DegreeSequence, matching, base: int = 0) -> Multigraph:
    """Underlying multigraph of a perfect matching of the ``m`` half-edges.

    Half-edges are owned in vertex order: vertex ``v`` holds
    ``offsets[v] .. offsets[v+1]-1`` (shifted by ``base``, so ``base=1`` accepts
    1-based labels). ``matching`` is an ``(m/2, 2)`` array of pairs or a flat
    length-``m`` array paired consecutively.
    """
    m = d.half_edges
    pairs = np.asarray(matching, dtype=np.int64).reshape(-1, 2) - base
    flat = pairs.ravel()
    if flat.size != m or (m and not np.array_equal(np.sort(flat), np.arange(m))):
        raise ValueError("not a perfect matching of the half-edges")
    return Multigraph(d.n, d.owner[pairs])


# --------------------------------------------------------------------------
# components and cycles


@dataclass(frozen=True)
class ComponentReport:
    labels: np.ndarray
    sizes: np.ndarray
    edge_counts: np.ndarray

    @property
    def excess(self) -> np.ndarray:
        return self.edge_counts - self.sizes

    @property
    def classes(self) -> list[str]:
        return [_class_of(x) for x in self.excess.tolist()]

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(self.classes)
        return {k: c.get(k, 0) for k in ("tree", "unicyclic", "complex")}

    @property
    def n_complex(self) -> int:
        return int(np.count_nonzero(self.excess > 0))


def _class_of(ex: int) -> str:
    if ex < 0:
        return "tree"
    return "unicyclic" if ex == 0 else "complex"


def classify_components(G: Multigraph) -> ComponentReport:
    ncomp, labels = G._components
    sizes = np.bincount(labels, minlength=ncomp)
    ecount = np.bincount(labels[G.edges[:, 0]], minlength=ncomp) if G.n_edges else np.zeros(ncomp, int)
    return ComponentReport(labels=labels, sizes=sizes, edge_counts=ecount)


def _component_edges(G: Multigraph, keep) -> dict[int, list[tuple[int, int]]]:
    """Edges of each component whose id satisfies ``keep`` (a boolean mask)."""
    _, labels = G._components
    e = G.edges
    if not e.size:
        return {}
    lab = labels[e[:, 0]]
    sel = keep[lab]
    out: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for c, u, v in zip(lab[sel].tolist(), e[sel, 0].tolist(), e[sel, 1].tolist()):
        out[c].append((u, v))
    return out


@dataclass(frozen=True)
class CycleCounts:
    """``counts[k-1]`` is the number of ``k``-cycle sub-multigraphs."""

    counts: np.ndarray

    def __getitem__(self, k: int) -> int:
        return int(self.counts[k - 1])

    @property
    def K(self) -> int:
        return int(self.counts.size)

    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[int, int]:
        return {k + 1: int(c) for k, c in enumerate(self.counts.tolist())}


def count_cycles(G: Multigraph, K: int, budget: int = DEFAULT_CYCLE_BUDGET) -> CycleCounts:
    """Count ``k``-cycle sub-multigraphs for ``k = 1..K``.

    A loop is one 1-cycle, an edge of multiplicity ``m`` gives ``C(m, 2)``
    2-cycles, and a vertex cycle of length ``k >= 3`` contributes the product of
    the multiplicities along it. Only components with non-negative excess and
    only the 2-core of their simple skeleton are searched.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    out = np.zeros(K, dtype=np.int64)
    out[0] = G.n_loops
    if K >= 2:
        out[1] = sum(c * (c - 1) // 2 for c in G.mult.values())
    if K >= 3 and G.n_edges:
        rep = classify_components(G)
        per_comp = _component_edges(G, rep.excess >= 0)
        steps = [0]
        for edges in per_comp.values():
            _cycles_in_component(edges, K, out, steps, budget)
    return CycleCounts(out)


def _cycles_in_component(edges, K, out, steps, budget) -> None:
    mult: dict[tuple[int, int], int] = Counter((u, v) for u, v in edges if u != v)
    adj: dict[int, set[int]] = defaultdict(set)
    for u, v in mult:
        adj[u].add(v)
        adj[v].add(u)
    # leaf pruning on the simple skeleton
    deg = {v: len(nb) for v, nb in adj.items()}
    stack = [v for v, x in deg.items() if x <= 1]
    removed = set()
    while stack:
        v = stack.pop()
        if v in removed:
            continue
        removed.add(v)
        for w in adj[v]:
            if w not in removed:
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
    core = {v: adj[v] - removed for v in adj if v not in removed}
    if not core:
        return

    def w(u, v):
        return mult[(u, v) if u < v else (v, u)]

    if all(len(nb) == 2 for nb in core.values()):
        # disjoint simple cycles: walk each one
        seen = set()
        for s in core:
            if s in seen:
                continue
            length, weight, prev, cur = 0, 1, None, s
            while True:
                seen.add(cur)
                nxt = next(x for x in core[cur] if x != prev) if prev is not None else min(core[cur])
                weight *= w(cur, nxt)
                length += 1
                prev, cur = cur, nxt
                if cur == s:
                    break
            if length <= K:
                out[length - 1] += weight
        return

    order = sorted(core)
    for s in order:
        # paths s -> ... using vertices > s; close back to s
        path = [s]
        weights = [1]
        iters = [iter(sorted(x for x in core[s] if x > s))]
        on_path = {s}
        while iters:
            steps[0] += 1
            if steps[0] > budget:
                raise CycleBudgetExceeded(f"cycle budget {budget} exceeded")
            nxt = next(iters[-1], None)
            if nxt is None:
                iters.pop()
                on_path.discard(path.pop())
                weights.pop()
                continue
            if nxt in on_path:
                continue
            wt = weights[-1] * w(path[-1], nxt)
            length = len(path) + 1
            if length >= 3 and s in core[nxt] and path[1] < nxt:
                if length <= K:
                    out[length - 1] += wt * w(nxt, s)
            if length < K:
                path.append(nxt)
                weights.append(wt)
                on_path.add(nxt)
                iters.append(iter(sorted(x for x in core[nxt] if x > s and x not in on_path)))


# --------------------------------------------------------------------------
# rooted trees (AHU codes)

LEAF = "()"


@lru_cache(maxsize=None)
def tree_children(code: str) -> tuple[str, ...]:
    """Top-level child codes of a rooted-tree code."""
    kids = []
    depth = 0
    start = 1
    for i in range(1, len(code) - 1):
        c = code[i]
        depth += 1 if c == "(" else -1
        if depth == 0:
            kids.append(code[start:i + 1])
            start = i + 1
    return tuple(kids)


def tree_from_children(children: Iterable[str]) -> str:
    return "(" + "".join(sorted(children)) + ")"


@lru_cache(maxsize=None)
def canonical_tree(code: str) -> str:
    """Re-sort children at every level so any valid tree code becomes canonical."""
    return tree_from_children(canonical_tree(c) for c in tree_children(code))


@lru_cache(maxsize=None)
def tree_aut(code: str) -> int:
    kids = tree_children(code)
    a = 1
    for c, m in Counter(kids).items():
        a *= tree_aut(c) ** m * math.factorial(m)
    return a


def tree_size(code: str) -> int:
    return len(code) // 2


@lru_cache(maxsize=None)
def tree_census(code: str) -> tuple[tuple[int, int], ...]:
    """Sorted ``(children, count)`` pairs over the non-root vertices."""
    c: Counter = Counter()
    stack = list(tree_children(code))
    while stack:
        t = stack.pop()
        kids = tree_children(t)
        c[len(kids)] += 1
        stack.extend(kids)
    return tuple(sorted(c.items()))


def tree_orderings(code: str) -> int:
    """Number of lexicographic labelings of the rooted tree (prod c_v! / aut)."""
    prod = 1
    stack = [code]
    while stack:
        t = stack.pop()
        kids = tree_children(t)
        prod *= math.factorial(len(kids))
        stack.extend(kids)
    return prod // tree_aut(code)


def _rooted_code(root: int, adj: dict[int, list[int]], blocked: set[int]) -> str:
    """AHU code of the tree hanging at ``root`` away from ``blocked`` vertices."""
    order = []
    parent = {root: None}
    stack = [root]
    while stack:
        v = stack.pop()
        order.append(v)
        for w in adj[v]:
            if w != parent[v] and w not in blocked:
                if w in parent:
                    raise ValueError("component is not unicyclic")
                parent[w] = v
                stack.append(w)
    kids: dict[int, list[str]] = defaultdict(list)
    code = {}
    for v in reversed(order):
        code[v] = tree_from_children(kids[v])
        if parent[v] is not None:
            kids[parent[v]].append(code[v])
    return code[root]


# --------------------------------------------------------------------------
# unicyclic components


def _dihedral_images(seq: tuple[str, ...]):
    k = len(seq)
    rev = seq[::-1]
    for s in range(k):
        yield seq[s:] + seq[:s]
        yield rev[s:] + rev[:s]


def min_bracelet(seq: Sequence[str]) -> tuple[str, ...]:
    seq = tuple(seq)
    if len(seq) <= 1:
        return seq
    return min(_dihedral_images(seq))


def component_code(trees: Sequence[str]) -> str:
    """Canonical code of a cycle carrying ``trees`` in cyclic order."""
    k = len(trees)
    if k < 1:
        raise ValueError("a cycle needs at least one vertex")
    return f"C{k}:" + "".join(min_bracelet(trees))


@lru_cache(maxsize=None)
def parse_component(code: str) -> tuple[int, tuple[str, ...]]:
    head, _, body = code.partition(":")
    if not head.startswith("C"):
        raise ValueError(f"bad component code {code!r}")
    k = int(head[1:])
    trees = tree_children("(" + body + ")")
    if len(trees) != k:
        raise ValueError(f"bad component code {code!r}")
    return k, trees


@lru_cache(maxsize=None)
def component_aut(code: str) -> int:
    k, trees = parse_component(code)
    a = 1
    for t in trees:
        a *= tree_aut(t)
    if k == 2:
        return a * (2 if trees[0] == trees[1] else 1)
    if k >= 3:
        return a * sum(1 for img in _dihedral_images(trees) if img == trees)
    return a


def canonicalize(component: Multigraph | Iterable[Sequence[int]]) -> str:
    """Canonical code of a connected multigraph with excess 0."""
    edges = component.edges.tolist() if isinstance(component, Multigraph) else list(component)
    if not edges:
        raise ValueError("component has no edges")
    adj: dict[int, list[int]] = defaultdict(list)
    loops: Counter = Counter()
    verts = set()
    for u, v in edges:
        verts.update((u, v))
        if u == v:
            loops[u] += 1
        else:
            adj[u].append(v)
            adj[v].append(u)
    for v in verts:
        adj.setdefault(v, [])
    if len(edges) != len(verts):
        raise ValueError("component is not unicyclic (excess != 0)")

    # peel leaves; what survives is the cycle
    deg = {v: len(adj[v]) + 2 * loops[v] for v in verts}
    stack = [v for v in verts if deg[v] <= 1]
    alive = set(verts)
    while stack:
        v = stack.pop()
        if v not in alive:
            continue
        alive.discard(v)
        for w in adj[v]:
            if w in alive:
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
    if not alive:
        raise ValueError("component is not unicyclic")

    if len(alive) == 1:
        (v,) = alive
        if loops[v] != 1:
            raise ValueError("component is not unicyclic")
        cycle = [v]
    elif len(alive) == 2:
        u, v = sorted(alive)
        if adj[u].count(v) != 2:
            raise ValueError("component is not unicyclic")
        cycle = [u, v]
    else:
        start = min(alive)
        cycle = [start]
        prev, cur = None, start
        while True:
            nbs = [w for w in adj[cur] if w in alive and w != prev]
            if not nbs:
                raise ValueError("component is not unicyclic")
            nxt = min(nbs)
            if nxt == start:
                break
            cycle.append(nxt)
            prev, cur = cur, nxt
            if len(cycle) > len(alive):
                raise ValueError("component is not unicyclic")
        if len(cycle) != len(alive):
            raise ValueError("component is not unicyclic")

    on_cycle = set(cycle)
    trees = [_rooted_code(r, adj, on_cycle - {r}) for r in cycle]
    if sum(tree_size(t) for t in trees) != len(verts):
        raise ValueError("component is not connected")
    return component_code(trees)


# --------------------------------------------------------------------------
# fragments


@dataclass(frozen=True)
class Fragment:
    """Unlabeled disjoint union of unicyclic components (sorted codes)."""

    components: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(sorted(self.components)))

    @classmethod
    def from_code(cls, code: str) -> "Fragment":
        if code == EMPTY_CODE or code == "":
            return cls(())
        comps = []
        for c in code.split("+"):
            _, trees = parse_component(c)
            comps.append(component_code([canonical_tree(t) for t in trees]))
        return cls(tuple(comps))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[str]]) -> "Fragment":
        """Fragment with one component per tree sequence in ``cycles``."""
        return cls(tuple(component_code(t) for t in cycles))

    @property
    def code(self) -> str:
        return "+".join(self.components) if self.components else EMPTY_CODE

    def __str__(self) -> str:
        return self.code

    @property
    def is_empty(self) -> bool:
        return not self.components

    @cached_property
    def cycle_type(self) -> dict[int, int]:
        c = Counter(parse_component(x)[0] for x in self.components)
        return dict(sorted(c.items()))

    @property
    def is_simple(self) -> bool:
        ct = self.cycle_type
        return not ct.get(1) and not ct.get(2)

    @cached_property
    def _census(self) -> tuple[dict[int, int], dict[int, int]]:
        h_r: Counter = Counter()
        h_t: Counter = Counter()
        for comp in self.components:
            _, trees = parse_component(comp)
            for t in trees:
                h_r[2 + len(tree_children(t))] += 1
                for kids, cnt in tree_census(t):
                    h_t[kids + 1] += cnt
        return dict(sorted(h_r.items())), dict(sorted(h_t.items()))

    @property
    def cycle_degrees(self) -> dict[int, int]:
        """``h^r_i``: cycle vertices of degree ``i``."""
        return self._census[0]

    @property
    def tree_degrees(self) -> dict[int, int]:
        """``h^t_i``: non-cycle vertices of degree ``i``."""
        return self._census[1]

    @cached_property
    def degree_census(self) -> dict[int, int]:
        h = Counter(self.cycle_degrees)
        h.update(self.tree_degrees)
        return dict(sorted(h.items()))

    @property
    def n_vertices(self) -> int:
        return sum(self.degree_census.values())

    @property
    def n_edges(self) -> int:
        return self.n_vertices

    @cached_property
    def aut(self) -> int:
        a = 1
        for comp, m in Counter(self.components).items():
            a *= component_aut(comp) ** m * math.factorial(m)
        return a

    @property
    def authe(self) -> int:
        ct = self.cycle_type
        return self.aut * 2 ** ct.get(1, 0) * 2 ** ct.get(2, 0)

    def decode(self) -> Multigraph:
        """A labeled representative of this fragment."""
        edges: list[tuple[int, int]] = []
        nxt = 0
        for comp in self.components:
            k, trees = parse_component(comp)
            roots = list(range(nxt, nxt + k))
            nxt += k
            if k == 1:
                edges.append((roots[0], roots[0]))
            else:
                for i in range(k):
                    edges.append((roots[i], roots[(i + 1) % k]))
            stack = list(zip(roots, trees))
            while stack:
                v, t = stack.pop()
                for child in tree_children(t):
                    edges.append((v, nxt))
                    stack.append((nxt, child))
                    nxt += 1
        return Multigraph.from_edges(nxt, edges)


def extract_fragment(G: Multigraph) -> Fragment:
    """Union of the unicyclic components of ``G`` as a canonical fragment."""
    if not G.n_edges:
        return Fragment(())
    rep = classify_components(G)
    per_comp = _component_edges(G, rep.excess == 0)
    return Fragment(tuple(canonicalize(e) for e in per_comp.values()))


def aut(H: Fragment) -> int:
    return H.aut


def authe(H: Fragment) -> int:
    return H.authe


# --------------------------------------------------------------------------
# brute force, for small graphs


def brute_force_aut(G: Multigraph) -> int:
    """Count vertex permutations preserving every multiplicity (small graphs)."""
    n = G.n
    M = np.zeros((n, n), dtype=np.int64)
    for u, v in G.edges.tolist():
        M[u, v] += 1
        if u != v:
            M[v, u] += 1
    sig = [(int(G.degrees[v]), int(M[v, v]), tuple(sorted(M[v].tolist()))) for v in range(n)]
    classes: dict = defaultdict(list)
    for v in range(n):
        classes[sig[v]].append(v)
    count = 0
    perm = [0] * n
    groups = list(classes.values())

    def rec(gi):
        nonlocal count
        if gi == len(groups):
            P = np.array(perm)
            if np.array_equal(M[np.ix_(P, P)], M):
                count += 1
            return
        g = groups[gi]
        for img in itertools.permutations(g):
            for a, b in zip(g, img):
                perm[a] = b
            rec(gi + 1)

    rec(0)
    return count


def general_authe(G: Multigraph) -> int:
    """Half-edge automorphisms: ``aut * 2^loops * prod mult!``."""
    a = brute_force_aut(G) * 2 ** G.n_loops
    for c in G.mult.values():
        a *= math.factorial(c)
    return a
