"""Closed-form limit quantities for cycles, simplicity and acyclicity.

All functions take the scalar ``nu = rho2 / rho1`` unless they need the full
degree sequence. Closed forms are the primary evaluators; series forms exist as
independent cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.special import gammaln

from .degseq import DegreeSequence
from .multigraph import Fragment, Multigraph, general_authe

SERIES_TOL = 1e-17
MAX_SERIES_TERMS = 10_000_000


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not nu >= 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    return nu


def xi(k: int, nu: float) -> float:
    """Limiting mean of the number of ``k``-cycles."""
    return _check_nu(nu) ** k / (2 * k)


def Q(nu: float) -> float:
    """Limiting acyclicity probability of the simple graph; zero for nu >= 1."""
    nu = _check_nu(nu)
    if nu >= 1:
        return 0.0
    return math.sqrt(1 - nu) * math.exp(nu / 2 + nu * nu / 4)


def prob_simple_limit(nu: float) -> float:
    nu = _check_nu(nu)
    return math.exp(-nu / 2 - nu * nu / 4)


def series_terms(nu: float, tol: float = SERIES_TOL) -> int:
    """Smallest K with the geometric tail bound of sum_{k>K} nu^k/2k below ``tol``."""
    if nu == 0:
        return 1
    # sum_{k>K} nu^k/2k <= nu^{K+1} / (2(K+1)(1-nu))
    K = 1
    while nu ** (K + 1) / (2 * (K + 1) * (1 - nu)) >= tol:
        K = K * 2 if K < 64 else K + max(1, K // 8)
        if K > MAX_SERIES_TERMS:
            raise ValueError("series too slow to converge; nu too close to 1")
    return K


def _log_series(nu: float, start: int, K: int) -> float:
    k = np.arange(start, K + 1, dtype=float)
    terms = np.exp(k * math.log(nu) - np.log(2 * k))
    return float(math.fsum(terms[::-1]))


def p_acyc(nu: float, method: str = "closed", terms: int | None = None) -> float:
    """Limit of P(simple graph is acyclic).

    ``method="series"`` evaluates exp(-sum_{k>=3} nu^k/2k) with a truncation
    chosen by the geometric tail bound unless ``terms`` is given.
    """
    nu = _check_nu(nu)
    if nu >= 1:
        return 0.0
    if method == "closed":
        return Q(nu)
    if method != "series":
        raise ValueError(f"unknown method {method!r}")
    if nu == 0:
        return 1.0
    K = terms if terms is not None else series_terms(nu)
    return math.exp(-_log_series(nu, 3, K)) if K >= 3 else 1.0


def solve_nu0(tol: float = 1e-7) -> float:
    """Root of Q(nu) = 1/2 on [0, 1] by bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, 1.0
    while True:
        mid = 0.5 * (lo + hi)
        q = Q(mid)
        if abs(q - 0.5) < tol and hi - lo < tol:
            return mid
        if q > 0.5:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            return mid


def expected_total_cycles(nu: float) -> float:
    nu = _check_nu(nu)
    if nu >= 1:
        raise ValueError("expected number of cycles diverges for nu >= 1")
    return -0.5 * math.log1p(-nu)


def joint_cycle_prob(a: Mapping[int, int], nu: float, variant: str = "multigraph") -> float:
    """Limit probability of exactly ``a[k]`` ``k``-cycles for every ``k``."""
    nu = _check_nu(nu)
    if nu >= 1:
        raise ValueError("joint cycle law requires nu < 1")
    a = {int(k): int(v) for k, v in a.items() if v}
    if any(k < 1 or v < 0 for k, v in a.items()):
        raise ValueError("cycle type needs k >= 1 and a_k >= 0")
    if variant == "multigraph":
        base = math.sqrt(1 - nu)
    elif variant == "simple":
        if a.get(1) or a.get(2):
            raise ValueError("a simple graph has no 1- or 2-cycles")
        base = Q(nu)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    logp = sum(v * math.log(xi(k, nu)) - math.lgamma(v + 1) for k, v in a.items()) if a else 0.0
    if a and nu == 0:
        return 0.0
    return base * math.exp(logp)


@dataclass(frozen=True)
class LimitLaw:
    """Bundle of limit quantities at a fixed ``nu``."""

    nu: float

    @property
    def Q(self) -> float:
        return Q(self.nu)

    def xi(self, k: int) -> float:
        return xi(k, self.nu)

    @property
    def p_acyc(self) -> float:
        return p_acyc(self.nu)

    @property
    def prob_simple(self) -> float:
        return prob_simple_limit(self.nu)

    @property
    def expected_total_cycles(self) -> float:
        return expected_total_cycles(self.nu)


# --------------------------------------------------------------------------
# finite-n expectations


def _as_multigraph(H) -> tuple[Multigraph, int]:
    if isinstance(H, Fragment):
        return H.decode(), H.authe
    if isinstance(H, Multigraph):
        return H, general_authe(H)
    raise TypeError("H must be a Fragment or a Multigraph")


def _falling(x: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= x - j
    return out


def _rho_exact(d: DegreeSequence, i: int) -> Fraction:
    degs = d.degrees.astype(object)
    return Fraction(int(sum(_falling(int(x), i) for x in degs)), d.n)


def expected_copies(H, d: DegreeSequence, exact: bool = False):
    """Main-term approximation n^h prod rho_{n,i}^{h_i} / (authe(H) m_n^l)."""
    G, ae = _as_multigraph(H)
    h, ell = G.n, G.n_edges
    census = np.bincount(G.degrees)
    val = Fraction(d.n) ** h / (ae * Fraction(d.half_edges) ** ell)
    for i, c in enumerate(census.tolist()):
        if c:
            val *= _rho_exact(d, i) ** c
    return val if exact else float(val)


def xi_bound(H, d: DegreeSequence, exact: bool = False):
    """Upper bound on E[copies of H] for H of minimum degree >= 2.

    (n_hat)_h prod rho_{n,i}^{h_i} / (authe(H) lambda_hat_n^h prod_{i<=l}(m_n-2i+1)),
    where ``n_hat`` counts vertices of degree at least 2.
    """
    G, ae = _as_multigraph(H)
    h, ell = G.n, G.n_edges
    if h and int(G.degrees.min()) < 2:
        raise ValueError("H must have minimum degree >= 2")
    n_hat = int(np.count_nonzero(d.degrees >= 2))
    lam_hat = Fraction(n_hat, d.n)
    if h > 0 and lam_hat == 0:
        raise ValueError("lambda_hat_n = 0")
    m = d.half_edges
    denom = ae * lam_hat ** h
    for i in range(1, ell + 1):
        denom *= m - 2 * i + 1
    if denom == 0:
        return Fraction(0) if exact else 0.0
    val = Fraction(_falling(n_hat, h)) / denom
    census = np.bincount(G.degrees)
    for i, c in enumerate(census.tolist()):
        if c:
            val *= _rho_exact(d, i) ** c
    return val if exact else float(val)


def expected_loops(d: DegreeSequence, exact: bool = False):
    """E[number of loops] = rho_{n,2} / (2 (rho_{n,1} - 1/n))."""
    m = d.half_edges
    if m < 2:
        return Fraction(0) if exact else 0.0
    val = Fraction(int(sum(int(x) * (int(x) - 1) for x in d.degrees)), 2 * (m - 1))
    return val if exact else float(val)


# --------------------------------------------------------------------------
# auxiliary inequalities


def aux_ineq_sides(alpha, beta) -> tuple[Fraction, Fraction]:
    """Both sides of the product inequality, exactly.

    LHS = prod_i prod_{j<beta_i} alpha_i/(alpha_i - j),
    RHS = prod_{j < beta-k+1} alpha/(alpha - j), with alpha, beta the totals.
    """
    alpha = [int(x) for x in alpha]
    beta = [int(x) for x in beta]
    if len(alpha) != len(beta) or not alpha:
        raise ValueError("alpha and beta need the same positive length")
    if any(b < 1 or a < b for a, b in zip(alpha, beta)):
        raise ValueError("need positive integers with alpha_i >= beta_i")
    lhs = Fraction(1)
    for a, b in zip(alpha, beta):
        lhs *= Fraction(a ** b, _falling(a, b))
    A, B, k = sum(alpha), sum(beta), len(alpha)
    rhs = Fraction(A ** (B - k + 1), _falling(A, B - k + 1))
    return lhs, rhs


def aux_ineq2_sup(N: int, delta: int | None = None) -> dict:
    """Largest value of ln(.)/a for both auxiliary bounds at size ``N``.

    Small range ``1 <= a < delta``: ln(N^a (N-a)! / N!).
    Large range ``delta <= a < N``: ln(N^delta (N-a)! / (N+delta-a)!).
    """
    if delta is None:
        delta = int(math.floor(N ** 0.4))
    out = {"N": N, "delta": delta}
    a = np.arange(1, delta, dtype=float)
    if a.size:
        small = (a * math.log(N) + gammaln(N - a + 1) - gammaln(N + 1)) / a
        out["small"] = float(small.max())
    else:
        out["small"] = float("-inf")
    a = np.arange(delta, N, dtype=float)
    large = (delta * math.log(N) + gammaln(N - a + 1) - gammaln(N + delta - a + 1)) / a
    out["large"] = float(large.max())
    out["sup"] = max(out["small"], out["large"])
    # explicit admissible choice for the small range: N^a (N-a)!/N! <= (N/(N-a))^a
    out["explicit_small_bound"] = delta / (N - delta) if N > delta else float("inf")
    return out


def check_appendix_inequalities(
    samples: int = 100_000,
    max_alpha: int = 50,
    max_k: int = 4,
    Ns=(10**3, 10**4, 10**5, 10**6),
    seed: int = 0,
) -> dict:
    """Random exact checks of the product inequality plus the sup table."""
    rng = np.random.default_rng(seed)
    violations = []
    ks = rng.integers(1, max_k + 1, size=samples)
    for t in range(samples):
        k = int(ks[t])
        alpha = rng.integers(1, max_alpha + 1, size=k)
        beta = np.array([rng.integers(1, x + 1) for x in alpha])
        lhs, rhs = aux_ineq_sides(alpha, beta)
        if lhs < rhs:
            violations.append((alpha.tolist(), beta.tolist()))
    table = [aux_ineq2_sup(N) for N in Ns]
    sups = [r["sup"] for r in table]
    return {
        "samples": samples,
        "violations": violations,
        "sup_table": table,
        "decreasing": all(x > y for x, y in zip(sups, sups[1:])),
    }
