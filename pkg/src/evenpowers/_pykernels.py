"""Numpy implementations of the inner loops; used when the extension is absent."""

import numpy as np

BACKEND = "python"

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def lpf_sieve(N):
    lpf = np.zeros(N + 1, dtype=np.int64)
    if N >= 1:
        lpf[1] = 1
    for p in range(2, N + 1):
        if lpf[p] == 0:
            lpf[p::p] = p
    return lpf


def power_residue_counts(k, q):
    m = np.arange(1, q + 1, dtype=object)
    residues = np.array([pow(int(x), k, q) for x in m], dtype=np.int64)
    return np.bincount(residues, minlength=q).astype(np.int64)


def _powers_mod64(ms, k):
    acc = np.ones(len(ms), dtype=np.uint64)
    base = ms.astype(np.uint64)
    with np.errstate(over="ignore"):
        for _ in range(k):
            acc = acc * base
    return acc


def weyl_sums(ms, k, nums, ebits, alphas, chunk=1 << 22):
    ms = np.asarray(ms, dtype=np.int64)
    nums = np.asarray(nums, dtype=np.uint64)
    ebits = np.asarray(ebits, dtype=np.int64)
    alphas = np.asarray(alphas, dtype=np.float64)
    mk = _powers_mod64(ms, k)
    mkf = np.ones(len(ms))
    for _ in range(k):  # same rounding sequence as the compiled kernel
        mkf = mkf * ms
    out = np.empty(len(alphas), dtype=np.complex128)
    rows = max(1, chunk // max(1, len(ms)))
    for start in range(0, len(alphas), rows):
        sl = slice(start, start + rows)
        e = ebits[sl]
        exact = (e >= 0) & (e <= 64)
        phase = np.empty((len(e), len(ms)))
        if exact.any():
            ee = e[exact].astype(np.uint64)
            mask = np.where(ee == 64, _MASK64, (np.uint64(1) << (ee % np.uint64(64))) - np.uint64(1))
            with np.errstate(over="ignore"):
                r = (nums[sl][exact][:, None] * mk[None, :]) & mask[:, None]
            phase[exact] = np.ldexp(r.astype(np.float64), -e[exact][:, None])
        if (~exact).any():
            phase[~exact] = np.fmod(alphas[sl][~exact][:, None] * mkf[None, :], 1.0)
        out[sl] = np.exp(2j * np.pi * phase).sum(axis=1)
    return out


def expsum_phases(phases, weights):
    phases = np.asarray(phases, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    return complex(np.sum(weights * np.exp(2j * np.pi * phases)))


def sumset_counts(partials, values, N, chunk=1 << 22):
    partials = np.asarray(partials, dtype=np.int64)
    values = np.asarray(values, dtype=np.int64)
    counts = np.zeros(N + 1, dtype=np.int64)
    if len(partials) == 0 or len(values) == 0:
        return counts
    rows = max(1, chunk // len(values))
    for start in range(0, len(partials), rows):
        s = (partials[start:start + rows, None] + values[None, :]).ravel()
        s = s[(s >= 0) & (s <= N)]
        if len(s):
            counts += np.bincount(s, minlength=N + 1)
    return counts


def count_nested(n, flat, offsets):
    flat = np.asarray(flat, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    lists = [flat[offsets[i]:offsets[i + 1]] for i in range(len(offsets) - 1)]
    if not lists:
        return 1 if n == 0 else 0
    last = lists[-1]

    def rec(depth, partial):
        if depth == len(lists) - 1:
            target = n - partial
            lo = np.searchsorted(last, target, side="left")
            hi = np.searchsorted(last, target, side="right")
            return int(hi - lo)
        total = 0
        for v in lists[depth]:
            if partial + v > n:
                break
            total += rec(depth + 1, partial + int(v))
        return total

    return rec(0, 0)
