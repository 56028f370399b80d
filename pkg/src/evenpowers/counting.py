"""Exact counts of representations n = sum_{k in K} x_k^k at desk scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .arith import dyadic_range, iroot, smooth_range
from .errors import ScaleLimitError
from .holder import ExponentSet

MAX_TERMS = 8
MAX_N_NESTED = 10 ** 6
MAX_N_MITM = 10 ** 8
MAX_HALF = 50_000_000
MAX_DENSITY_N = 10 ** 7

F_EXPONENTS = frozenset({2, 4, 6})


@dataclass(frozen=True)
class CountConfig:
    """``restricted`` draws x_k from the dyadic window X_k for k in {2, 4, 6}
    and from the n^gamma-smooth set Y_k otherwise, with windows taken at
    ``N`` (defaults to the n being counted).  ``allow_zero`` only affects
    unrestricted counts.
    """

    K: ExponentSet
    allow_zero: bool = False
    restricted: bool = False
    gamma: float | None = None
    N: int | None = None

    def __post_init__(self):
        if not isinstance(self.K, ExponentSet):
            object.__setattr__(self, "K", ExponentSet.of(self.K))
        if len(self.K) > MAX_TERMS:
            raise ScaleLimitError(f"at most {MAX_TERMS} exponents supported, got {len(self.K)}")
        if self.restricted and any(k not in F_EXPONENTS for k in self.K) and self.gamma is None:
            raise ValueError("restricted counts with exponents outside {2,4,6} need gamma")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")


def value_lists(n: int, cfg: CountConfig) -> list[np.ndarray]:
    """Sorted arrays of admissible values x^k <= n, one per exponent."""
    out = []
    for k in cfg.K:
        if cfg.restricted:
            N = cfg.N if cfg.N is not None else n
            xs = dyadic_range(k, N) if k in F_EXPONENTS else smooth_range(k, N, cfg.gamma)
            xs = [int(x) for x in xs]
        else:
            xs = range(0 if cfg.allow_zero else 1, iroot(n, k) + 1) if n >= 0 else ()
        vals = [x ** k for x in xs]
        out.append(np.array([v for v in vals if v <= n], dtype=np.int64))
    return out


def _nested(n, lists):
    order = sorted(range(len(lists)), key=lambda i: len(lists[i]))
    ordered = [lists[i] for i in order]
    offsets = np.zeros(len(ordered) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(x) for x in ordered])
    flat = np.concatenate(ordered) if ordered else np.zeros(0, dtype=np.int64)
    return int(_kernels.count_nested(n, flat, offsets))


def _split(sizes):
    """Index subset whose size product balances the complement, ties by the smaller maximum."""
    r = len(sizes)
    logs = [math.log(max(s, 1)) for s in sizes]
    best, best_key = (), None
    for mask in range(1 << r):
        a = sum(logs[i] for i in range(r) if mask >> i & 1)
        b = sum(logs) - a
        key = (max(a, b), mask)
        if best_key is None or key < best_key:
            best, best_key = tuple(i for i in range(r) if mask >> i & 1), key
    return best


def _half_sums(lists, n):
    acc = np.zeros(1, dtype=np.int64)
    for vals in lists:
        if len(acc) * len(vals) > MAX_HALF:
            raise ScaleLimitError(f"meet-in-the-middle half exceeds {MAX_HALF} partial sums")
        acc = (acc[:, None] + vals[None, :]).ravel()
        acc = acc[acc <= n]
    return np.sort(acc)


def _mitm(n, lists):
    idx = _split([len(x) for x in lists])
    left = _half_sums([lists[i] for i in idx], n)
    right = _half_sums([lists[i] for i in range(len(lists)) if i not in idx], n)
    target = n - left
    return int(np.sum(np.searchsorted(right, target, "right") - np.searchsorted(right, target, "left")))


def count_representations(n: int, cfg: CountConfig, method: str | None = None) -> int:
    """Number of tuples (x_k) with sum x_k^k = n under ``cfg``.

    ``method`` is ``'nested'`` (depth-first enumeration), ``'mitm'``
    (sorted half-sum join) or ``'both'``, which runs the two and checks
    they agree.  The default is ``'both'`` up to 10^6 and ``'mitm'`` above.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if method is None:
        method = "both" if n <= MAX_N_NESTED else "mitm"
    if method not in ("nested", "mitm", "both"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("nested", "both") and n > MAX_N_NESTED:
        raise ScaleLimitError(f"nested enumeration is limited to n <= {MAX_N_NESTED}")
    if n > MAX_N_MITM:
        raise ScaleLimitError(f"counting is limited to n <= {MAX_N_MITM}")
    lists = value_lists(n, cfg)
    if method == "nested":
        return _nested(n, lists)
    if method == "mitm":
        return _mitm(n, lists)
    a, b = _nested(n, lists), _mitm(n, lists)
    if a != b:
        raise AssertionError(f"count mismatch at n={n}: nested {a}, meet-in-the-middle {b}")
    return a


def representation_counts(N: int, cfg: CountConfig) -> np.ndarray:
    """R(t) for t = 0..N in one sweep (ranges fixed at N when restricted)."""
    if N < 0:
        raise ValueError("N must be non-negative")
    if cfg.restricted and cfg.N is None:
        cfg = CountConfig(cfg.K, cfg.allow_zero, True, cfg.gamma, N)
    lists = sorted(value_lists(N, cfg), key=len)
    biggest = lists.pop()
    partials = _half_sums(lists, N)
    return _kernels.sumset_counts(partials, biggest, N)


@dataclass(frozen=True)
class DensityRow:
    decade: int
    upto: int
    representable: int
    fraction: float


def density_scan(N: int, cfg: CountConfig) -> list[DensityRow]:
    """Fraction of 1 <= n <= 10^j that are representable, for each 10^j <= N."""
    if N > MAX_DENSITY_N:
        raise ScaleLimitError(f"density scans are limited to N <= {MAX_DENSITY_N}")
    if N < 10:
        raise ValueError("density scan needs N >= 10")
    hit = representation_counts(N, cfg)[1:] > 0
    cum = np.cumsum(hit)
    rows = []
    j = 1
    while 10 ** j <= N:
        up = 10 ** j
        rows.append(DensityRow(j, up, int(cum[up - 1]), float(cum[up - 1]) / up))
        j += 1
    return rows


def restricted_count(n: int, K: ExponentSet, gamma: float, N: int | None = None) -> int:
    """Tuples with x_k in X_k (k in {2,4,6}) or Y_k (otherwise), windows at N (default n)."""
    return count_representations(n, CountConfig(K, restricted=True, gamma=gamma, N=N))


def density_csv(rows: list[DensityRow]) -> str:
    lines = ["decade,upto,representable,fraction"]
    lines += [f"{r.decade},{r.upto},{r.representable},{r.fraction:.15g}" for r in rows]
    return "\n".join(lines) + "\n"
