"""Singular series, local factors and the singular integral at desk scale."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.signal import fftconvolve

from .arith import complete_sums, dickman_rho_array, real_power_floor
from .errors import DivergenceError, NumericIntegrityError, ScaleLimitError
from .holder import ExponentSet

IMAG_TOL = 1e-9


def _coprime_residues(q):
    a = np.arange(q, dtype=np.int64)
    return a[np.gcd(a, q) == 1]


def A_coeff(n: int, q: int, K: ExponentSet) -> float:
    """A(n, q) = sum_{(a,q)=1} q^-s prod_k S_k(q, a) e(-a n / q), s = |K|.

    The sum is real by the a <-> q - a pairing; a residual imaginary part
    above 1e-9 raises NumericIntegrityError.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if q == 1:
        return 1.0
    a = _coprime_residues(q)
    prod = np.ones(len(a), dtype=np.complex128)
    for k in K:
        prod *= complete_sums(k, q)[a] / q
    ph = ((a * (n % q)) % q) / q
    total = complex(np.sum(prod * np.exp(-2j * np.pi * ph)))
    if abs(total.imag) > IMAG_TOL:
        raise NumericIntegrityError(f"A({n},{q}) has imaginary part {total.imag:.3g}")
    return total.real


def omega_floor(K: ExponentSet) -> float:
    return float(K.reciprocal_sum)


@dataclass(frozen=True)
class SingularSeriesResult:
    n: int
    Z: int
    partial: float
    terms: Mapping[int, float] = field(repr=False)
    tail_bound: float
    omega: float


def tail_bound(Z: float, omega: float) -> float:
    """Integral estimate Z^(2-omega)/(omega-2) of sum_{q>Z} q^(1-omega)."""
    if omega <= 2:
        raise DivergenceError(
            f"sum of reciprocal exponents is {omega:.6g} <= 2: sum q^(1-omega) diverges, no tail bound"
        )
    return Z ** (2 - omega) / (omega - 2)


def singular_series(n: int, Z: int, K: ExponentSet, strict: bool = True) -> SingularSeriesResult:
    """Truncated singular series sum_{q <= Z} A(n, q).

    With ``strict`` a set K whose reciprocal sum is <= 2 raises
    DivergenceError; otherwise the partial sum is returned with an infinite
    tail bound.
    """
    if Z < 1:
        raise ValueError("Z must be >= 1")
    omega = omega_floor(K)
    try:
        tb = tail_bound(Z, omega)
    except DivergenceError:
        if strict:
            raise
        tb = math.inf
    terms = {q: A_coeff(n, q, K) for q in range(1, Z + 1)}
    partial = math.fsum(terms.values())
    return SingularSeriesResult(n, Z, partial, terms, tb, omega)


def _is_prime(p):
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class ChiPResult:
    p: int
    h_max: int
    value: float
    terms: tuple[float, ...]
    truncation_estimate: float


def chi_p(n: int, p: int, K: ExponentSet, h_max: int = 2) -> ChiPResult:
    """Local factor truncated at p^h_max: sum_{h=0}^{h_max} A(n, p^h).

    The reported truncation estimate is p^(h_max (1 - omega)).
    """
    if not _is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    if h_max < 0:
        raise ValueError("h_max must be >= 0")
    terms = tuple(A_coeff(n, p ** h, K) for h in range(h_max + 1))
    omega = omega_floor(K)
    est = float(p) ** (h_max * (1 - omega))
    return ChiPResult(p, h_max, math.fsum(terms), terms, est)


# ------------------------------------------------------------ singular integral


@dataclass(frozen=True)
class SingularIntegralResult:
    value: float
    mode: str
    feasible: bool
    stderr: float = 0.0
    ci95: tuple[float, float] | None = None


def _range_and_weights(k, n, gamma):
    """Integer range (lo, hi] of m_k and weights on lo+1..hi."""
    if k <= 6:
        lo = n // 2 ** k
    else:
        lo = real_power_floor(n, gamma * k)
    hi = n
    m = np.arange(lo + 1, hi + 1, dtype=np.float64)
    w = m ** (1.0 / k - 1.0)
    if k > 6 and len(m):
        w = w * dickman_rho_array(np.log(m) / (k * gamma * math.log(n)))
    return lo + 1, hi, w


EXACT_MAX_N = 10 ** 6
EXACT_MAX_TERMS = 4


def singular_integral(
    n: int,
    K: ExponentSet,
    gamma: float = 0.05,
    mode: str = "auto",
    samples: int = 200_000,
    seed: int = 0,
) -> SingularIntegralResult:
    """Weighted count of compositions n = sum_k m_k with

    n/2^k < m_k <= n for k <= 6 (weight m^(1/k-1)),
    n^(gamma k) < m_k <= n for larger k (weight rho(log m/(k gamma log n)) m^(1/k-1)),

    scaled by prod_k 1/k (= 1/(2^s s!) for K = {2, ..., 2s}).
    ``mode='exact'`` convolves the weight sequences; ``'mc'`` samples
    compositions with stratification on the first coordinate.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ks = list(K)
    if mode == "auto":
        mode = "exact" if len(ks) <= EXACT_MAX_TERMS and n <= EXACT_MAX_N else "mc"
    if mode == "exact" and (len(ks) > EXACT_MAX_TERMS or n > EXACT_MAX_N):
        raise ScaleLimitError(
            f"exact mode limited to |K| <= {EXACT_MAX_TERMS} and n <= {EXACT_MAX_N}"
        )
    pref = 1.0
    for k in ks:
        pref /= k
    parts = [_range_and_weights(k, n, gamma) for k in ks]
    if any(hi < lo for lo, hi, _ in parts) or sum(lo for lo, _, _ in parts) > n:
        return SingularIntegralResult(0.0, mode, False)

    if mode == "exact":
        # dense weight arrays indexed by m = 0..n
        dense = []
        for lo, hi, w in parts:
            arr = np.zeros(n + 1)
            arr[lo:hi + 1] = w
            dense.append(arr)
        acc = dense[0]
        for arr in dense[1:-1]:
            acc = fftconvolve(acc, arr)[: n + 1] if n > 20_000 else np.convolve(acc, arr)[: n + 1]
            np.maximum(acc, 0.0, out=acc)
        if len(dense) == 1:
            total = float(acc[n])
        else:
            last = dense[-1]
            total = math.fsum(acc * last[::-1])
        value = pref * total
        if not value > 0:
            raise NumericIntegrityError(f"singular integral {value} not positive on a feasible range")
        return SingularIntegralResult(value, "exact", True)

    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    return _singular_integral_mc(n, parts, pref, samples, seed)


def _singular_integral_mc(n, parts, pref, samples, seed):
    rng = np.random.default_rng(seed)
    if len(parts) == 1:
        lo, hi, w = parts[0]
        val = float(w[n - lo]) if lo <= n <= hi else 0.0
        return SingularIntegralResult(pref * val, "mc", True)
    lo0, hi0, w0 = parts[0]
    rest, last = parts[1:-1], parts[-1]
    size0 = hi0 - lo0 + 1
    strata = min(64, size0)
    edges = np.linspace(lo0, hi0 + 1, strata + 1).astype(np.int64)
    per = max(2, samples // strata)
    other = 1.0
    for lo, hi, _ in rest:
        other *= hi - lo + 1
    est, var = 0.0, 0.0
    for s in range(strata):
        a, b = edges[s], edges[s + 1]
        if b <= a:
            continue
        m0 = rng.integers(a, b, size=per)
        vals = w0[m0 - lo0].copy()
        total = m0.copy()
        for lo, hi, w in rest:
            m = rng.integers(lo, hi + 1, size=per)
            vals *= w[m - lo]
            total += m
        ml = n - total
        llo, lhi, lw = last
        ok = (ml >= llo) & (ml <= lhi)
        vals = np.where(ok, vals * lw[np.clip(ml - llo, 0, len(lw) - 1)], 0.0)
        scale = (b - a) * other
        est += scale * vals.mean()
        var += scale ** 2 * vals.var(ddof=1) / per
    se = math.sqrt(var)
    value = float(pref * est)
    return SingularIntegralResult(
        value, "mc", True, pref * se, (value - 1.96 * pref * se, value + 1.96 * pref * se)
    )
