"""Number-theoretic kernels: Weyl sums, complete sums, smooth numbers, Dickman's
function and the major-arc approximants w_k, W_k and their errors.

Phases are reduced exactly wherever the frequency is rational: floats are
dyadic rationals p/2^e, so frac(alpha * m^k) is computed as
(p * m^k mod 2^e) / 2^e in 64-bit integer arithmetic, and ``Fraction`` /
:class:`ArcPoint` frequencies reduce a*m^k modulo q with Python integers.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels


class EmptyRangeWarning(UserWarning):
    pass


def iroot(n: int, k: int) -> int:
    """Largest r >= 0 with r**k <= n."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / k)))
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def real_power_floor(n: int, e: float) -> int:
    """floor(n**e), snapping to the integer when n**e is within 1e-9 of one.

    Guards against 10000**0.25 = 10.000000000000002 style drift.
    """
    y = float(n) ** float(e)
    r = round(y)
    if abs(y - r) <= 1e-9 * max(1.0, y):
        return int(r)
    return int(math.floor(y))


@dataclass(frozen=True)
class ArcPoint:
    """alpha = a/q + beta with gcd(a, q) = 1 and |beta| < 1/2."""

    q: int
    a: int
    beta: float = 0.0

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be positive, got {self.q}")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError(f"gcd(a, q) must be 1, got a={self.a}, q={self.q}")
        if not abs(self.beta) < 0.5:
            raise ValueError(f"|beta| must be < 1/2, got {self.beta}")

    @property
    def alpha(self) -> float:
        return self.a / self.q + self.beta


def _mk_mod(ms, k, q):
    return np.array([pow(int(m), k, q) for m in ms], dtype=object)


# alpha * m^k below this is reduced in floating point with error < 1e-12
_FLOAT_PHASE_LIMIT = 4096.0


def _exact_phase(p, e, mk):
    """frac(p m^k / 2^e) from integers, for any e >= 0."""
    r = (p * mk) % (1 << e)
    return math.ldexp(r >> (e - 60), -60) if e > 60 else math.ldexp(r, -e)


def _beta_phases(ms, k, beta):
    """frac(beta * m^k) for float beta; exact unless beta * m^k is small."""
    if beta == 0:
        return np.zeros(len(ms))
    p, d = float(beta).as_integer_ratio()
    e = d.bit_length() - 1
    if e <= 64:
        mod = 1 << e
        mk = _mk_mod(ms, k, mod)
        r = (mk * (p % mod)) % mod
        return np.array([math.ldexp(int(x), -e) for x in r], dtype=np.float64)
    with np.errstate(over="ignore"):
        mkf = np.asarray(ms, dtype=np.float64) ** k
    if len(ms) and abs(beta) * mkf.max() > _FLOAT_PHASE_LIMIT:
        return np.array([_exact_phase(p, e, int(m) ** k) for m in ms], dtype=np.float64)
    return np.fmod(beta * mkf, 1.0) % 1.0


def phases(ms, k: int, alpha) -> np.ndarray:
    """frac(alpha * m^k) for each m, alpha a float, Fraction, int or ArcPoint."""
    ms = np.asarray(ms, dtype=np.int64)
    if isinstance(alpha, ArcPoint):
        q = alpha.q
        rat = (_mk_mod(ms, k, q) * (alpha.a % q)) % q
        out = np.array([int(x) / q for x in rat], dtype=np.float64)
        return (out + _beta_phases(ms, k, alpha.beta)) % 1.0
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
        q = a.denominator
        rat = (_mk_mod(ms, k, q) * (a.numerator % q)) % q
        return np.array([int(x) / q for x in rat], dtype=np.float64)
    return _beta_phases(ms, k, float(alpha)) % 1.0


def _dyadic(alphas):
    nums = np.zeros(len(alphas), dtype=np.uint64)
    ebits = np.full(len(alphas), -1, dtype=np.int64)
    for i, a in enumerate(alphas):
        p, d = float(a).as_integer_ratio()
        e = d.bit_length() - 1
        if e <= 64:
            nums[i] = p % (1 << e) if e < 64 else p % (1 << 64)
            ebits[i] = e
    return nums, ebits


def weyl_sum(ms, k: int, alpha) -> complex:
    """sum over m in ``ms`` of e(alpha m^k)."""
    ms = np.asarray(ms, dtype=np.int64)
    if len(ms) == 0:
        return 0j
    if isinstance(alpha, (ArcPoint, Fraction, int)):
        return _kernels.expsum_phases(phases(ms, k, alpha), np.ones(len(ms)))
    return complex(weyl_sums(ms, k, np.array([float(alpha)]))[0])


def weyl_sums(ms, k: int, alphas) -> np.ndarray:
    """Vectorised :func:`weyl_sum` over an array of float frequencies."""
    ms = np.asarray(ms, dtype=np.int64)
    alphas = np.asarray(alphas, dtype=np.float64)
    nums, ebits = _dyadic(alphas)
    out = _kernels.weyl_sums(ms, k, nums, ebits, alphas)
    if len(ms):
        # the kernels reduce alpha m^k in floating point when 2^e exceeds
        # 2^64; redo those frequencies exactly where that would lose digits
        with np.errstate(over="ignore"):
            top = np.float64(ms.max()) ** k
        for i in np.flatnonzero((ebits < 0) & (np.abs(alphas) * top > _FLOAT_PHASE_LIMIT)):
            out[i] = _kernels.expsum_phases(_beta_phases(ms, k, alphas[i]), np.ones(len(ms)))
    return out


def dyadic_range(k: int, n: int) -> np.ndarray:
    """X_k = {floor(n^(1/k)) + 1, ..., floor(2 n^(1/k))}."""
    r = iroot(n, k)
    top = iroot(2 ** k * n, k)  # floor(2 n^(1/k)) exactly
    return np.arange(r + 1, top + 1, dtype=np.int64)


def exp_sum_f(k: int, n: int, alpha) -> complex:
    """f_k(alpha) = sum over the dyadic range X_k of e(alpha m^k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ms = dyadic_range(k, n)
    if len(ms) == 0:
        warnings.warn(f"empty range X_{k} for n={n}", EmptyRangeWarning, stacklevel=2)
        return 0j
    return weyl_sum(ms, k, alpha)


@dataclass(frozen=True, eq=False)
class SmoothSet:
    X: int
    Y: int
    members: np.ndarray

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members.tolist())


@lru_cache(maxsize=8)
def _lpf(N):
    arr = _kernels.lpf_sieve(N)
    arr.setflags(write=False)
    return arr


def largest_prime_factor_table(N: int) -> np.ndarray:
    """lpf[m] for 0 <= m <= N, with lpf[1] = 1 and lpf[0] = 0."""
    return _lpf(int(N))


def smooth_numbers(X: int, Y: int) -> SmoothSet:
    """All 1 <= m <= X whose prime factors are all <= Y."""
    if X < 1 or Y < 2:
        raise ValueError("smooth_numbers needs X >= 1 and Y >= 2")
    lpf = _lpf(int(X))
    members = np.flatnonzero(lpf[1:] <= Y) + 1
    members.setflags(write=False)
    return SmoothSet(int(X), int(Y), members)


def smooth_range(k: int, n: int, gamma: float) -> np.ndarray:
    """Y_k: n^gamma-smooth integers up to n^(1/k)."""
    X = iroot(n, k)
    if X < 1:
        return np.zeros(0, dtype=np.int64)
    Y = max(real_power_floor(n, gamma), 1)
    if Y < 2:
        return np.array([1], dtype=np.int64)
    return smooth_numbers(X, Y).members


def exp_sum_g(k: int, n: int, gamma: float, alpha) -> complex:
    """g_k(alpha) = sum over Y_k of e(alpha m^k)."""
    return weyl_sum(smooth_range(k, n, gamma), k, alpha)


# ---------------------------------------------------------------- Dickman rho

_RHO_N = 1000  # grid cells per unit interval
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


class _DickmanGrid:
    """rho on u = j + i/N for each unit j, built lazily one unit at a time.

    Unit j >= 2 comes from rho(u) = rho(j) - int_j^u rho(t-1)/t dt, one
    Gauss-Legendre rule per grid cell; cells never straddle an integer, where
    rho's derivatives jump.  rho(t-1) off the grid comes from cubic
    interpolation inside unit j-1.
    """

    def __init__(self, N=_RHO_N):
        self.N = N
        self.units: list[np.ndarray] = []
        self._lock = threading.Lock()

    def _unit_eval(self, j, u):
        if j <= 0:
            return np.ones_like(u)
        if j == 1:
            return 1.0 - np.log(u)
        vals = self.units[j]
        N = self.N
        x = (u - j) * N
        i0 = np.clip(np.floor(x).astype(np.int64) - 1, 0, N - 3)
        out = np.zeros_like(u)
        for a in range(4):
            la = np.ones_like(u)
            for b in range(4):
                if a != b:
                    la *= (x - (i0 + b)) / (a - b)
            out += la * vals[i0 + a]
        return out

    def _build_unit(self, j):
        N = self.N
        left = j + np.arange(N) / N
        half = 0.5 / N
        mids = left + half
        t = mids[:, None] + half * _GL_NODES[None, :]
        f = self._unit_eval(j - 1, t.ravel() - 1.0).reshape(t.shape) / t
        cell = half * (f * _GL_WEIGHTS[None, :]).sum(axis=1)
        start = self.units[j - 1][-1] if j >= 3 else 1.0 - math.log(2.0)
        vals = np.empty(N + 1)
        vals[0] = start
        vals[1:] = start - np.cumsum(cell)
        return vals

    def ensure(self, j_max):
        with self._lock:
            while len(self.units) <= j_max:
                j = len(self.units)
                if j < 2:
                    self.units.append(np.empty(0))  # closed form on [0, 2)
                else:
                    self.units.append(self._build_unit(j))

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < 0) or np.any(~np.isfinite(u)):
            raise ValueError("dickman_rho needs finite u >= 0")
        j = np.floor(u).astype(np.int64)
        # right endpoints belong to the unit on their left so u = 3.0 uses unit 2
        j = np.where((u == j) & (j >= 2), j - 1, j)
        self.ensure(int(j.max(initial=0)))
        out = np.empty_like(u)
        for jj in np.unique(j):
            sel = j == jj
            out[sel] = self._unit_eval(int(jj), u[sel])
        return out


_RHO = _DickmanGrid()


def dickman_rho(u: float) -> float:
    """Dickman's function: 1 on [0, 1], 1 - log u on [1, 2], then by continuation."""
    if u < 0:
        raise ValueError(f"dickman_rho needs u >= 0, got {u}")
    return float(_RHO(np.array([u], dtype=np.float64))[0])


def dickman_rho_array(us) -> np.ndarray:
    return _RHO(us)


def dickman_step_check(u_max: int = 10) -> float:
    """Largest |rho_N - rho_{N/2}| at integer points 2..u_max (step-halving check)."""
    coarse = _DickmanGrid(_RHO_N // 2)
    pts = np.arange(2, u_max + 1, dtype=np.float64)
    return float(np.max(np.abs(_RHO(pts) - coarse(pts))))


# ------------------------------------------------------- major-arc approximants


@lru_cache(maxsize=4096)
def _residue_counts(k, q):
    arr = _kernels.power_residue_counts(k, q)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=1024)
def _complete_sums_all(k, q):
    c = _residue_counts(k, q).astype(np.float64)
    out = q * np.fft.ifft(c)
    out.setflags(write=False)
    return out


def complete_sums(k: int, q: int) -> np.ndarray:
    """S_k(q, a) for every residue a = 0..q-1 (via a DFT of the m^k histogram)."""
    return _complete_sums_all(int(k), int(q))


def complete_sum_S(k: int, q: int, a: int) -> complex:
    """S_k(q, a) = sum_{m=1}^{q} e(a m^k / q)."""
    if k < 1 or q < 1:
        raise ValueError("complete_sum_S needs k >= 1 and q >= 1")
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd(a, q) must be 1, got a={a}, q={q}")
    c = _residue_counts(int(k), int(q))
    r = np.flatnonzero(c)
    ph = ((a % q) * r % q) / q
    return _kernels.expsum_phases(ph, c[r].astype(np.float64))


def w_approx(k: int, n: int, gamma: float, beta: float) -> complex:
    """Continuous approximant w_k(beta).

    k <= 4: sum_{m <= n} k^-1 m^(1/k - 1) e(beta m).
    k >= 5: same summand times rho(log m / (gamma k log n)), over n^(gamma k) < m <= n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k <= 4:
        m = np.arange(1, n + 1, dtype=np.float64)
        wts = m ** (1.0 / k - 1.0) / k
    else:
        if not (0 < gamma <= 1.0 / k):
            raise ValueError(f"gamma must lie in (0, 1/k] for k={k}, got {gamma}")
        lo = real_power_floor(n, gamma * k)
        m = np.arange(lo + 1, n + 1, dtype=np.float64)
        if len(m) == 0:
            return 0j
        u = np.log(m) / (gamma * k * math.log(n))
        wts = m ** (1.0 / k - 1.0) / k * dickman_rho_array(u)
    ph = np.fmod(beta * m, 1.0)
    return _kernels.expsum_phases(ph, wts)


def W_approx(k: int, n: int, gamma: float, arc: ArcPoint) -> complex:
    """W_k(alpha) = q^-1 S_k(q, a) w_k(beta)."""
    return complete_sum_S(k, arc.q, arc.a) / arc.q * w_approx(k, n, gamma, arc.beta)


def delta_k(k: int, n: int, gamma: float, arc: ArcPoint, kind: str | None = None) -> complex:
    """Approximation error on a major arc.

    ``kind='f'`` gives f_k - W_k, ``kind='g'`` gives g_k - W_k.  By default
    k in {2, 4, 6} uses f and larger k uses g.
    """
    if kind is None:
        kind = "f" if k in (2, 4, 6) else "g"
    if kind == "f":
        main = weyl_sum(dyadic_range(k, n), k, arc)
    elif kind == "g":
        main = weyl_sum(smooth_range(k, n, gamma), k, arc)
    else:
        raise ValueError(f"kind must be 'f' or 'g', got {kind!r}")
    return main - W_approx(k, n, gamma, arc)


# ---------------------------------------------------------- minor-arc sampling


def _convergents(p: int, d: int):
    """Continued-fraction convergents (h, k) of p/d, exact."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while d:
        a, r = divmod(p, d)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1
        p, d = d, r


def in_major_arcs(alpha: float, X: float, n: int) -> bool:
    """Whether ||alpha - a/q|| <= X/(q n) for some q <= X, gcd(a, q) = 1.

    Valid when X < sqrt(n)/2: then any such a/q is within 1/(2q^2) of alpha
    and is therefore a continued-fraction convergent.
    """
    p, d = float(alpha).as_integer_ratio()
    for h, q in _convergents(p, d):
        if q > X:
            break
        dist = abs(Fraction(p, d) - Fraction(h, q))
        dist = min(dist % 1, 1 - dist % 1)
        if dist * q * n <= X:
            return True
    return False


@dataclass(frozen=True)
class MinorArcStats:
    n: int
    tau: float
    samples: int
    rejected: int
    max: float
    median: float
    mean: float
    q90: float
    q99: float
    envelope: float  # n^(-tau/2)
    seed: int


def minor_arc_scan(n: int, tau: float, sample_count: int = 10_000, seed: int = 0) -> MinorArcStats:
    """Sample alpha uniformly on the minor arcs m(n^tau) and summarise |f_2(alpha)|/f_2(0)."""
    if not (0 < tau < 0.5):
        raise ValueError(f"tau must lie in (0, 1/2), got {tau}")
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    X = float(n) ** tau
    if X < 1:
        raise ValueError("major arcs need X = n^tau >= 1")
    if not X < 0.5 * math.sqrt(n):
        raise ValueError(f"major arcs overlap: n^tau = {X:.4g} >= sqrt(n)/2")
    ms = dyadic_range(2, n)
    if len(ms) == 0:
        raise ValueError(f"empty range X_2 for n={n}")
    rng = np.random.default_rng(seed)
    kept: list[float] = []
    rejected = 0
    while len(kept) < sample_count:
        batch = rng.random(max(64, 2 * (sample_count - len(kept))))
        for a in batch:
            if in_major_arcs(a, X, n):
                rejected += 1
            else:
                kept.append(float(a))
                if len(kept) == sample_count:
                    break
        if rejected > 100 * sample_count:
            raise ValueError("minor arcs are too small to sample")
    vals = np.abs(weyl_sums(ms, 2, np.array(kept))) / len(ms)
    return MinorArcStats(
        n=n,
        tau=tau,
        samples=len(kept),
        rejected=rejected,
        max=float(vals.max()),
        median=float(np.median(vals)),
        mean=float(vals.mean()),
        q90=float(np.quantile(vals, 0.9)),
        q99=float(np.quantile(vals, 0.99)),
        envelope=float(n) ** (-tau / 2),
        seed=seed,
    )
