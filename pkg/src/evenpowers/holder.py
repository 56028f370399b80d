"""Hölder weights over a set of exponents and the resulting mean-value exponent.

For a block K and weights a_k > 1 with sum(1/a_k) = 1,

    int_0^1 prod_{k in K} |g_k|^2  <<  prod_k (int_0^1 |g_k|^{2 a_k})^{1/a_k}
                                   <<  F(0)^2 n^phi,
    phi = sum_k lambda(k, a_k) / (k a_k) - 2 sum_k 1/k.

Every function here also takes optional per-exponent ``powers`` p_k for the
generalisation to int prod |g_k|^{2 p_k}, where lambda is evaluated at
p_k a_k and the subtracted part becomes 2 sum p_k/k.  With all p_k = 1 this
is exactly the formula above.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CoverageError
from .tables import LambdaTable, NuTable, lambda_real, nu_value

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class ExponentSet:
    """Strictly increasing tuple of integer exponents, each >= 2."""

    members: tuple[int, ...]

    def __init__(self, members: Iterable[int]):
        ms = [int(m) for m in members]
        if not ms:
            raise ValueError("exponent set must be non-empty")
        if len(set(ms)) != len(ms):
            raise ValueError(f"exponent set has repeated members: {ms}")
        if ms != sorted(ms):
            raise ValueError(f"exponent set must be strictly increasing: {ms}")
        if ms[0] < 2:
            raise ValueError(f"exponents must be >= 2, got {ms[0]}")
        object.__setattr__(self, "members", tuple(ms))

    @classmethod
    def of(cls, members: Iterable[int]) -> "ExponentSet":
        """Build from members in any order (duplicates still rejected)."""
        ms = list(members)
        if len(set(ms)) != len(ms):
            raise ValueError(f"exponent set has repeated members: {ms}")
        return cls(sorted(ms))

    @classmethod
    def even(cls, lo: int, hi: int) -> "ExponentSet":
        """{lo, lo+2, ..., hi}."""
        return cls(range(lo, hi + 1, 2))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, k):
        return k in self.members

    def __or__(self, other):
        return ExponentSet.of(set(self.members) | set(other))

    def __repr__(self):
        return f"ExponentSet({list(self.members)})"

    @property
    def reciprocal_sum(self) -> Fraction:
        return sum((Fraction(1, k) for k in self.members), Fraction(0))


def reciprocal_sum(K: ExponentSet) -> Fraction:
    """Exact sum of 1/k over K; ``float()`` it for the real value."""
    return K.reciprocal_sum


@dataclass(frozen=True)
class HolderAssignment:
    weights: Mapping[int, float | Fraction]

    def __post_init__(self):
        w = dict(self.weights)
        for k, a in w.items():
            if not a > 1:
                raise ValueError(f"weight a_{k} = {a} must exceed 1")
        object.__setattr__(self, "weights", w)
        if self.constraint_residual > WEIGHT_TOL:
            raise ValueError(
                f"sum of 1/a_k is {self.reciprocal_total} (residual {self.constraint_residual:.3g})"
            )

    @property
    def reciprocal_total(self):
        if all(isinstance(a, (int, Fraction)) for a in self.weights.values()):
            return sum((1 / Fraction(a) for a in self.weights.values()), Fraction(0))
        return math.fsum(1.0 / float(a) for a in self.weights.values())

    @property
    def constraint_residual(self) -> float:
        return abs(float(self.reciprocal_total - 1))

    def __getitem__(self, k):
        return self.weights[k]


@dataclass(frozen=True)
class PhiResult:
    phi: float
    per_k_terms: Mapping[int, float]
    reciprocal_part: float


def _powers(K, powers):
    if powers is None:
        return {k: 1 for k in K}
    p = {k: powers.get(k, 1) for k in K}
    for k, v in p.items():
        if not v > 0:
            raise ValueError(f"power for k={k} must be positive")
    return p


def ford_weights(K: ExponentSet, powers: Mapping[int, int] | None = None) -> HolderAssignment:
    """Weights proportional to k: a_k = c*k/p_k with c = sum p_k/k.

    This is the proportional choice a_i k_j = a_j k_i (for unit powers), and
    it satisfies sum 1/a_k = 1 exactly.
    """
    p = _powers(K, powers)
    c = sum((Fraction(p[k], k) for k in K), Fraction(0))
    weights = {k: c * k / p[k] for k in K}
    bad = [k for k, a in weights.items() if a <= 1]
    if bad:
        raise ValueError(f"degenerate block {list(K)}: proportional weights give a_k <= 1 for k={bad}")
    return HolderAssignment(weights)


def phi(
    K: ExponentSet,
    assignment: HolderAssignment,
    table: LambdaTable,
    powers: Mapping[int, int] | None = None,
) -> PhiResult:
    p = _powers(K, powers)
    missing = [k for k in K if k not in assignment.weights]
    if missing:
        raise ValueError(f"assignment has no weight for k={missing}")
    terms = {}
    for k in K:
        a = assignment.weights[k]
        terms[k] = lambda_real(table, k, p[k] * a) / (k * float(a))
    recip = 2.0 * float(sum((Fraction(p[k], k) for k in K), Fraction(0)))
    total = math.fsum(terms[k] for k in K) - recip
    return PhiResult(total, terms, recip)


def _u_bounds(K, table, seed, p):
    """Box for u_k = 1/a_k keeping every lambda lookup inside the table."""
    lo, hi = {}, {}
    for k in K:
        s_lo, s_hi = table.contiguous_range(k, p[k] * float(seed.weights[k]))
        # a_k in [s_lo/p, s_hi/p] and a_k > 1, pulled in so 1/u never
        # rounds past a table edge
        lo[k] = p[k] / s_hi * (1 + 1e-12)
        hi[k] = min(p[k] / s_lo * (1 - 1e-12), 1.0 - 1e-12)
    return lo, hi


def optimize_weights(
    K: ExponentSet,
    table: LambdaTable,
    budget: int = 20,
    powers: Mapping[int, int] | None = None,
    seed: HolderAssignment | None = None,
):
    """Lower phi by pairwise coordinate descent on sum(1/a_k) = 1.

    Works in u_k = 1/a_k so the constraint is a hyperplane; each move shifts
    mass between two coordinates, clamped to the table's covered range.
    Starts from :func:`ford_weights` and only accepts strict improvements, so
    the result is never worse than the seed.  ``budget`` caps the number of
    full sweeps over all pairs; 0 returns the seed untouched.
    """
    p = _powers(K, powers)
    seed = seed or ford_weights(K, powers)
    seed_res = phi(K, seed, table, powers)
    if budget <= 0 or len(K) < 2:
        return seed, seed_res

    ks = list(K)
    u = {k: 1.0 / float(seed.weights[k]) for k in ks}
    lo, hi = _u_bounds(ks, table, seed, p)

    def term(k, uk):
        return lambda_real(table, k, p[k] / uk) * uk / k

    current = {k: term(k, u[k]) for k in ks}
    moved = False
    for _ in range(budget):
        gained = 0.0
        for i, j in itertools.combinations(ks, 2):
            t_lo = max(lo[i] - u[i], u[j] - hi[j])
            t_hi = min(hi[i] - u[i], u[j] - lo[j])
            if t_hi - t_lo <= 1e-15:
                continue
            base = current[i] + current[j]

            def g(t):
                return term(i, u[i] + t) + term(j, u[j] - t)

            grid = np.linspace(t_lo, t_hi, 17)
            vals = [g(t) for t in grid]
            b = int(np.argmin(vals))
            a0, a1 = grid[max(b - 1, 0)], grid[min(b + 1, len(grid) - 1)]
            best_t, best_v = grid[b], vals[b]
            if a1 > a0:
                r = minimize_scalar(g, bounds=(a0, a1), method="bounded",
                                    options={"xatol": 1e-12})
                if r.fun < best_v:
                    best_t, best_v = float(r.x), float(r.fun)
            if best_v < base - 1e-14 * max(1.0, abs(base)):
                u[i] += best_t
                u[j] -= best_t
                moved = True
                current[i] = term(i, u[i])
                current[j] = term(j, u[j])
                gained += base - (current[i] + current[j])
        if gained <= 1e-13:
            break

    if not moved:
        return seed, seed_res
    # put any rounding drift of sum(u) back on the largest coordinate
    drift = math.fsum(u.values()) - 1.0
    kmax = max(ks, key=lambda k: u[k])
    u[kmax] -= drift
    assignment = HolderAssignment({k: 1.0 / u[k] for k in ks})
    res = phi(K, assignment, table, powers)
    if res.phi > seed_res.phi:
        return seed, seed_res
    return assignment, res


@dataclass(frozen=True)
class MixedPhiResult:
    weights: tuple[float, ...]
    phi: float


def _compositions(m, r):
    """All r-tuples of non-negative integers summing to m."""
    if r == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _compositions(m - first, r - 1):
            yield (first,) + rest


_MAX_GRID_POINTS = 60_000


def mixed_phi(
    h: int,
    S: ExponentSet,
    nu: NuTable,
    resolution: float = 1e-3,
    refine: float = 1e-6,
) -> MixedPhiResult:
    """Minimise sum_i (x_i/k_i) nu(h, k_i, 1/x_i) over the simplex.

    Coefficients x_i = 0 drop their term.  A simplex grid at ``resolution``
    (coarsened if it would exceed a fixed point budget) is scanned first,
    then pairwise transfers with halving step refine down to ``refine``.
    Grid points whose 1/x_i fall outside a nu grid are skipped; if none is
    covered a CoverageError is raised.
    """
    if not (0 < resolution <= 1):
        raise ValueError(f"invalid grid resolution {resolution}; need 0 < resolution <= 1")
    ks = list(S)
    r = len(ks)

    def objective(x):
        total = 0.0
        for xi, k in zip(x, ks):
            if xi > 0:
                total += xi / k * nu_value(nu, h, k, 1.0 / xi)
        return total

    def safe(x):
        try:
            return objective(x)
        except CoverageError:
            return math.inf

    m = max(1, round(1 / resolution))
    while m > 1 and math.comb(m + r - 1, r - 1) > _MAX_GRID_POINTS:
        m = max(1, int(m * 0.7))
    best_x, best_v = None, math.inf
    for comp in _compositions(m, r):
        x = tuple(c / m for c in comp)
        v = safe(x)
        if v < best_v:
            best_x, best_v = x, v
    if best_x is None:
        raise CoverageError(f"nu table covers no simplex point for h={h}, S={ks}")

    x = list(best_x)
    step = 1.0 / m
    while step >= refine and r > 1:
        improved = False
        for i, j in itertools.permutations(range(r), 2):
            if x[j] < step:
                continue
            trial = list(x)
            trial[i] += step
            trial[j] -= step
            if trial[j] < 1e-15:
                trial[j] = 0.0
            v = safe(trial)
            if v < best_v - 1e-15:
                x, best_v, improved = trial, v, True
        if not improved:
            step /= 2
    return MixedPhiResult(tuple(x), best_v)
