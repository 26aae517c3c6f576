"""Limit fragment probabilities and the probability-ordered fragment catalogue.

The catalogue is built generatively: a fragment of cycle type ``a`` is a
multiset of components, each a ``k``-cycle carrying ``k`` i.i.d. rooted trees
(root law D̃, other vertices D̂). Union bounds on these generative
probabilities give sound pruning, and the closed-form ``pstar`` is evaluated
independently for every entry that survives.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .branching import OffspringModel
from .degseq import DegreeModel
from .limits import Q as Q_of
from .multigraph import Fragment, _dihedral_images, tree_children

ORDER_RTOL = 1e-12
DEFAULT_MAX_ENTRIES = 2_000_000


class CatalogueBudgetExceeded(RuntimeError):
    """The floor is too small for the configured entry budget."""


# --------------------------------------------------------------------------
# closed forms


def _log_degree_weight(degrees: Mapping[int, int], model: DegreeModel) -> float | None:
    """log prod_i (λ_i i! / ρ₁)^{h_i}, or None if some λ_i vanishes."""
    r1 = float(model.rho1)
    out = 0.0
    for i, h in degrees.items():
        lam = float(model.prob(i))
        if lam <= 0:
            return None
        out += h * (math.log(lam) + math.lgamma(i + 1) - math.log(r1))
    return out


def pstar(H: Fragment, model: DegreeModel) -> float:
    """sqrt(1-ν) / authe(H) * prod_i (λ_i i! / ρ₁)^{h_i}."""
    nu = model.require_subcritical()
    lw = _log_degree_weight(H.degree_census, model)
    if lw is None:
        return 0.0
    return math.sqrt(1 - nu) * math.exp(lw - math.log(H.authe))


def p_simple(G: Fragment, model: DegreeModel) -> float:
    """Q(ν) / aut(G) * prod_i (λ_i i! / ρ₁)^{g_i} for a simple fragment."""
    if not G.is_simple:
        raise ValueError("fragment has loops or double edges")
    nu = model.require_subcritical()
    lw = _log_degree_weight(G.degree_census, model)
    if lw is None:
        return 0.0
    return Q_of(nu) * math.exp(lw - math.log(G.aut))


def gamma(H: Fragment) -> int:
    """Number of lexicographic labelings of H (see module ``branching``)."""
    num = 1
    for k, a in H.cycle_type.items():
        num *= math.factorial(a) * (2 * k) ** a
    for i, h in H.cycle_degrees.items():
        num *= math.factorial(i - 2) ** h
    for i, h in H.tree_degrees.items():
        num *= math.factorial(i - 1) ** h
    q, r = divmod(num, H.authe)
    if r:
        raise ArithmeticError(f"gamma({H.code}) is not an integer")
    return q


def _nu_of(model_or_nu) -> float:
    if isinstance(model_or_nu, DegreeModel):
        return model_or_nu.require_subcritical()
    nu = float(model_or_nu)
    if not 0 <= nu < 1:
        raise ValueError(f"requires 0 <= nu < 1, got {nu}")
    return nu


def class_sum(a: Mapping[int, int], model_or_nu, variant: str = "pstar") -> float:
    """Total mass of all fragments with cycle type ``a``."""
    nu = _nu_of(model_or_nu)
    a = {int(k): int(v) for k, v in a.items() if v}
    if variant == "pstar":
        base = math.sqrt(1 - nu)
    elif variant == "simple":
        if a.get(1) or a.get(2):
            raise ValueError("simple variant needs a_1 = a_2 = 0")
        base = Q_of(nu)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not a:
        return base
    if nu == 0:
        return 0.0
    lg = sum(v * (k * math.log(nu) - math.log(2 * k)) - math.lgamma(v + 1) for k, v in a.items())
    return base * math.exp(lg)


def type_mass_total(nu: float, variant: str = "pstar", tol: float = 1e-15) -> tuple[float, float]:
    """Sum of ``class_sum`` over every cycle type, by explicit series product.

    Returns ``(value, bound)`` where ``bound`` caps the neglected mass of types
    with more than ``L`` cycle vertices.
    """
    nu = _nu_of(nu)
    if nu == 0:
        return (1.0 if variant == "pstar" else Q_of(0.0)), 0.0
    L = max(3, int(math.ceil(math.log(tol * (1 - nu)) / math.log(nu))))
    poly = np.zeros(L + 1)
    poly[0] = 1.0
    kmin = 1 if variant == "pstar" else 3
    for k in range(kmin, L + 1):
        # multiply by exp(xi x^k) = sum_j xi^j x^{jk} / j!, term by term
        xi = nu**k / (2 * k)
        new = poly.copy()
        coef = 1.0
        for j in range(1, L // k + 1):
            coef *= xi / j
            if coef < 1e-300:
                break
            new[j * k:] += coef * poly[: L + 1 - j * k]
        poly = new
    base = math.sqrt(1 - nu) if variant == "pstar" else Q_of(nu)
    return base * math.fsum(poly), base * nu ** (L + 1) / (1 - nu)


def sandwich_index(p: float, nu: float) -> int | None:
    """Largest ``k >= 3`` with Q ν^k / 2k >= p, or None if there is none."""
    q = Q_of(nu)
    k = 3
    if q * nu**3 / 6 < p:
        return None
    while q * nu ** (k + 1) / (2 * (k + 1)) >= p:
        k += 1
    return k


# --------------------------------------------------------------------------
# catalogue


@dataclass(frozen=True)
class FragmentProb:
    fragment: Fragment
    pstar: float
    psimple: float | None = None

    @property
    def code(self) -> str:
        return self.fragment.code

    def prob(self, variant: str) -> float:
        return self.pstar if variant == "pstar" else self.psimple

    def to_dict(self) -> dict:
        d = {"code": self.code, "pstar": self.pstar}
        if self.psimple is not None:
            d["psimple"] = self.psimple
        d["cycle_type"] = {str(k): v for k, v in self.fragment.cycle_type.items()}
        return d


@dataclass(frozen=True)
class FragmentCatalogue:
    """Fragments with probability at least ``floor``, sorted by probability."""

    entries: tuple[FragmentProb, ...]
    floor: float
    variant: str
    nu: float
    residuals: dict = field(default_factory=dict)
    unvisited_mass: float = 0.0
    total_bound: float = 0.0
    generative: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[FragmentProb]:
        return iter(self.entries)

    def __getitem__(self, i) -> FragmentProb:
        return self.entries[i]

    @property
    def probs(self) -> np.ndarray:
        return np.array([e.prob(self.variant) for e in self.entries])

    @property
    def codes(self) -> list[str]:
        return [e.code for e in self.entries]

    @property
    def enumerated_mass(self) -> float:
        return math.fsum(self.probs)

    @property
    def tail_mass(self) -> float:
        """Mass of all fragments below the floor, from class sums."""
        return math.fsum(self.residuals.values()) + self.unvisited_mass

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def top(self, M: int) -> "FragmentCatalogue":
        return FragmentCatalogue(self.entries[:M], self.floor, self.variant, self.nu)

    def to_jsonl(self, path: str | Path | None = None) -> str:
        text = "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in self.entries)
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self) -> dict:
        return {
            "nu": self.nu,
            "variant": self.variant,
            "floor": self.floor,
            "entries": len(self),
            "enumerated_mass": self.enumerated_mass,
            "tail_mass": self.tail_mass,
            "max_residual": self.max_residual,
        }


def read_jsonl(path: str | Path) -> list[FragmentProb]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            d = json.loads(line)
            out.append(FragmentProb(Fragment.from_code(d["code"]), d["pstar"], d.get("psimple")))
    return out


def order_entries(items: list, key_prob, key_code) -> list:
    """Probability descending with relative tolerance, then code ascending."""
    items = sorted(items, key=lambda e: (-key_prob(e), key_code(e)))
    out = []
    i = 0
    while i < len(items):
        head = key_prob(items[i])
        j = i + 1
        while j < len(items) and head - key_prob(items[j]) <= ORDER_RTOL * head:
            j += 1
        out.extend(sorted(items[i:j], key=key_code))
        i = j
    return out


def _multisets(items, size: int, scale: float, tau: float):
    """Multisets of ``size`` draws from ``items`` with probability >= ``tau``.

    ``items`` is a list of ``(p, code)`` sorted by ``p`` descending, where ``p``
    is the probability of one i.i.d. draw. Yields ``(prob, codes)`` with
    ``prob = scale * size!/prod m! * prod p``. Pruning uses the union bound
    P(draws contain S) <= (size)_j / prod m_S! * prod_{x in S} p_x.
    """
    chosen: list[str] = []

    def rec(start: int, j: int, factor: float, last: int, mult: int):
        if j == size:
            yield scale * factor, tuple(chosen)
            return
        for i in range(start, len(items)):
            p, code = items[i]
            m = mult + 1 if i == last else 1
            f = factor * (size - j) * p / m
            if scale * f < tau:
                if i == last:
                    continue
                break
            chosen.append(code)
            yield from rec(i, j + 1, f, i, m)
            chosen.pop()

    if size == 0:
        yield scale, ()
        return
    yield from rec(0, 0, 1.0, -1, 0)


class _Enumerator:
    def __init__(self, model: DegreeModel):
        self.model = model
        self.nu = model.require_subcritical()
        off = OffspringModel(model)
        self.q = off.dhat
        self.r = off.dtilde
        c = np.arange(self.r.size)
        self.root_gain = float((c * self.r).max()) if self.r.size else 0.0
        self._sub: dict[float, list] = {}
        self._root: dict[float, list] = {}
        self._comp: dict[tuple[int, float], list] = {}

    # rooted trees ---------------------------------------------------------

    def _build(self, children, tau: float, law: np.ndarray) -> list:
        out = []
        for c in range(law.size):
            if law[c] <= 0:
                continue
            for p, kids in _multisets(children, c, float(law[c]), tau):
                out.append((p, "(" + "".join(sorted(kids)) + ")"))
        out.sort(key=lambda t: (-t[0], t[1]))
        return out

    def subtrees(self, tau: float) -> list:
        """Trees under D̂ with probability >= tau, as ``(p, code)``."""
        if tau in self._sub:
            return self._sub[tau]
        nu = self.nu
        if nu == 0 or self.q.size == 1:
            res = [(float(self.q[0]), "()")] if self.q[0] >= tau else []
        else:
            taus = [tau]
            while taus[-1] <= 1.0:
                taus.append(taus[-1] / nu)
            res: list = []
            for t in reversed(taus):
                res = self._build(res, t, self.q)
        self._sub[tau] = res
        return res

    def roots(self, tau: float) -> list:
        """Trees with root law D̃ and probability >= tau."""
        if tau not in self._root:
            kids = self.subtrees(tau / self.root_gain) if self.root_gain > 0 else []
            self._root[tau] = self._build(kids, tau, self.r)
        return self._root[tau]

    # components -----------------------------------------------------------

    def components(self, k: int, tau: float) -> list:
        """``k``-cycle components with probability >= tau, as ``(p, code)``."""
        key = (k, tau)
        if key in self._comp:
            return self._comp[key]
        items = self.roots(tau / k)
        ocap = 2 * k if k >= 3 else k
        out = []
        seq: list[str] = []

        def rec(prod: float):
            if len(seq) == k:
                t = tuple(seq)
                if k >= 3:
                    images = set(_dihedral_images(t))
                    if min(images) != t:
                        return
                    orbit = len(images)
                elif k == 2:
                    if t[0] > t[1]:
                        return
                    orbit = 1 if t[0] == t[1] else 2
                else:
                    orbit = 1
                p = orbit * prod
                if p >= tau:
                    out.append((p, f"C{k}:" + "".join(t)))
                return
            for p, code in items:
                if ocap * prod * p < tau:
                    break
                if seq and code < seq[0]:
                    continue
                seq.append(code)
                rec(prod * p)
                seq.pop()

        rec(1.0)
        out.sort(key=lambda t: (-t[0], t[1]))
        self._comp[key] = out
        return out

    # cycle types ----------------------------------------------------------

    def cycle_types(self, floor: float, variant: str) -> list[tuple[dict[int, int], float]]:
        kmin = 1 if variant == "pstar" else 3
        nu = self.nu
        out = []

        def rec(a: dict[int, int], cs: float, last: int):
            out.append((dict(a), cs))
            k = max(last, kmin)
            while True:
                f = nu**k / (2 * k) / (a.get(k, 0) + 1)
                if cs * f < floor:
                    if k == last:
                        k += 1
                        continue
                    break
                a[k] = a.get(k, 0) + 1
                rec(a, cs * f, k)
                a[k] -= 1
                if not a[k]:
                    del a[k]
                k += 1

        base = class_sum({}, nu, variant)
        if base >= floor:
            if nu > 0:
                rec({}, base, 0)
            else:
                out.append(({}, base))
        return out


def enumerate_fragments(
    model: DegreeModel,
    floor: float,
    variant: str = "pstar",
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> FragmentCatalogue:
    """Every fragment with probability >= ``floor`` under ``variant``.

    ``variant="pstar"`` lists all fragments with their multigraph limit
    probability; ``variant="simple"`` lists simple fragments under p(G).
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    if variant not in ("pstar", "simple"):
        raise ValueError(f"unknown variant {variant!r}")
    en = _Enumerator(model)
    nu = en.nu
    shift = math.exp(nu / 2 + nu * nu / 4) if variant == "simple" else 1.0

    types = en.cycle_types(floor, variant)
    # per-length component thresholds: any member C of a type-a fragment has
    # cs(a) * a_k * pi(C) >= p >= floor
    need: dict[int, float] = {}
    for a, cs in types:
        for k, ak in a.items():
            need[k] = max(need.get(k, 0.0), cs * ak)
    comps = {k: en.components(k, floor / g) for k, g in need.items()}

    found: list[tuple[float, tuple[str, ...]]] = []
    type_of: list[str] = []
    residuals: dict[str, float] = {}
    visited = 0.0
    for a, cs in types:
        ks = sorted(a)
        acc_before = len(found)

        def rec(idx: int, val: float, picked: tuple[str, ...]):
            if idx == len(ks):
                found.append((val, picked))
                if len(found) > max_entries:
                    raise CatalogueBudgetExceeded(
                        f"more than {max_entries} fragments above floor {floor}"
                    )
                return
            k = ks[idx]
            for p, codes in _multisets(comps[k], a[k], val, floor):
                rec(idx + 1, p, picked + codes)

        rec(0, cs, ())
        type_of.extend([_type_key(a)] * (len(found) - acc_before))
        residuals[_type_key(a)] = cs
        visited += cs

    total, bound = type_mass_total(nu, variant)
    entries = []
    gen = {}
    for (p_gen, codes), key in zip(found, type_of):
        H = Fragment(codes)
        ps = pstar(H, model)
        psimple = ps * shift if H.is_simple else None
        fp = FragmentProb(H, ps, psimple)
        entries.append(fp)
        gen[H.code] = p_gen * shift
        residuals[key] -= fp.prob(variant)
    entries = order_entries(entries, lambda e: e.prob(variant), lambda e: e.code)
    return FragmentCatalogue(
        entries=tuple(entries),
        floor=floor,
        variant=variant,
        nu=nu,
        residuals=residuals,
        unvisited_mass=total - visited,
        total_bound=bound,
        generative=tuple(gen[e.code] for e in entries),
    )


def _type_key(a: Mapping[int, int]) -> str:
    return ",".join(f"{k}^{v}" for k, v in sorted(a.items())) or "empty"


def tree_root_probability(code: str, offspring: OffspringModel) -> float:
    """P(root-law tree is isomorphic to ``code``), independent of the enumerator."""
    return _shape_prob(code, offspring.dtilde, offspring.dhat)


def _shape_prob(code: str, root_law: np.ndarray, law: np.ndarray) -> float:
    kids = tree_children(code)
    c = len(kids)
    if c >= root_law.size or root_law[c] <= 0:
        return 0.0
    p = float(root_law[c]) * math.factorial(c)
    for sub, m in Counter(kids).items():
        p *= _shape_prob(sub, law, law) ** m / math.factorial(m)
    return p

