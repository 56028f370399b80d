# cython: language_level=3
"""Compiled inner loops. Signatures mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fmod, floor, ldexp, M_PI
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

BACKEND = "cython"


def lpf_sieve(Py_ssize_t N):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(N + 1, dtype=np.int64)
    cdef int64_t[::1] lpf = out
    cdef Py_ssize_t p, j
    if N >= 1:
        lpf[1] = 1
    for p in range(2, N + 1):
        if lpf[p] == 0:
            # p is prime; ascending p leaves the largest factor last
            j = p
            while j <= N:
                lpf[j] = p
                j += p
    return out


cdef inline uint64_t _mulmod(uint64_t a, uint64_t b, uint64_t q) nogil:
    # q < 2**32 so the product fits
    return (a * b) % q


def power_residue_counts(long k, long q):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(q, dtype=np.int64)
    cdef int64_t[::1] c = out
    cdef uint64_t m, r, base, e
    cdef uint64_t uq = <uint64_t>q
    if q >= 4294967296:
        raise ValueError("modulus too large for compiled kernel")
    for m in range(1, uq + 1):
        r = 1 % uq
        base = m % uq
        e = <uint64_t>k
        while e:
            if e & 1:
                r = _mulmod(r, base, uq)
            base = _mulmod(base, base, uq)
            e >>= 1
        c[r] += 1
    return out


def weyl_sums(cnp.ndarray ms_in, long k, cnp.ndarray nums_in,
              cnp.ndarray ebits_in, cnp.ndarray alphas_in):
    cdef const int64_t[::1] ms = np.ascontiguousarray(ms_in, dtype=np.int64)
    cdef const uint64_t[::1] nums = np.ascontiguousarray(nums_in, dtype=np.uint64)
    cdef const int64_t[::1] ebits = np.ascontiguousarray(ebits_in, dtype=np.int64)
    cdef const double[::1] alphas = np.ascontiguousarray(alphas_in, dtype=np.float64)
    cdef Py_ssize_t M = ms.shape[0], A = alphas.shape[0], i, j, t
    cdef cnp.ndarray out = np.zeros(A, dtype=np.complex128)
    cdef double[::1] o = out.view(np.float64)
    cdef uint64_t[::1] mk = np.empty(M, dtype=np.uint64)
    cdef double[::1] mkf = np.empty(M, dtype=np.float64)
    cdef uint64_t acc, mask
    cdef double accf, phase, sr, si, cr, ci, y, tt, scale
    cdef int64_t e
    for j in range(M):
        acc = 1
        accf = 1.0
        for t in range(k):
            acc = acc * <uint64_t>ms[j]
            accf = accf * <double>ms[j]
        mk[j] = acc
        mkf[j] = accf
    with nogil:
        for i in range(A):
            e = ebits[i]
            sr = 0.0
            si = 0.0
            cr = 0.0
            ci = 0.0
            if 0 <= e <= 64:
                mask = 0xFFFFFFFFFFFFFFFF if e == 64 else ((<uint64_t>1 << e) - 1)
                scale = ldexp(1.0, <int>(-e))
            for j in range(M):
                if 0 <= e <= 64:
                    phase = <double>((nums[i] * mk[j]) & mask) * scale
                else:
                    phase = fmod(alphas[i] * mkf[j], 1.0)
                phase = 2.0 * M_PI * phase
                y = cos(phase) - cr
                tt = sr + y
                cr = (tt - sr) - y
                sr = tt
                y = sin(phase) - ci
                tt = si + y
                ci = (tt - si) - y
                si = tt
            o[2 * i] = sr
            o[2 * i + 1] = si
    return out


def expsum_phases(cnp.ndarray phases_in, cnp.ndarray weights_in):
    cdef const double[::1] ph = np.ascontiguousarray(phases_in, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef Py_ssize_t n = ph.shape[0], j
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0, y, tt, a
    with nogil:
        for j in range(n):
            a = 2.0 * M_PI * ph[j]
            y = w[j] * cos(a) - cr
            tt = sr + y
            cr = (tt - sr) - y
            sr = tt
            y = w[j] * sin(a) - ci
            tt = si + y
            ci = (tt - si) - y
            si = tt
    return complex(sr, si)


def sumset_counts(cnp.ndarray partials_in, cnp.ndarray values_in, Py_ssize_t N):
    cdef const int64_t[::1] partials = np.ascontiguousarray(partials_in, dtype=np.int64)
    cdef const int64_t[::1] values = np.ascontiguousarray(np.sort(values_in), dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(N + 1, dtype=np.int64)
    cdef int64_t[::1] c = out
    cdef Py_ssize_t i, j, P = partials.shape[0], V = values.shape[0]
    cdef int64_t s
    with nogil:
        for i in range(P):
            for j in range(V):
                s = partials[i] + values[j]
                if s > N:
                    break
                if s >= 0:
                    c[s] += 1
    return out


def count_nested(int64_t n, cnp.ndarray flat_in, cnp.ndarray offsets_in):
    cdef const int64_t[::1] flat = np.ascontiguousarray(flat_in, dtype=np.int64)
    cdef const int64_t[::1] off = np.ascontiguousarray(offsets_in, dtype=np.int64)
    cdef Py_ssize_t L = off.shape[0] - 1
    if L <= 0:
        return 1 if n == 0 else 0
    cdef int64_t[::1] idx = np.zeros(L, dtype=np.int64)
    cdef int64_t[::1] partial = np.zeros(L + 1, dtype=np.int64)
    cdef int64_t count = 0, target, lo, hi, mid, left
    cdef Py_ssize_t d = 0, last = L - 1
    with nogil:
        if L == 1:
            for lo in range(off[0], off[1]):
                if flat[lo] == n:
                    count += 1
        else:
            idx[0] = off[0]
            while d >= 0:
                if idx[d] >= off[d + 1] or partial[d] + flat[idx[d]] > n:
                    # exhausted this level (lists are ascending)
                    d -= 1
                    if d >= 0:
                        idx[d] += 1
                    continue
                partial[d + 1] = partial[d] + flat[idx[d]]
                if d + 1 == last:
                    target = n - partial[d + 1]
                    lo = off[last]
                    hi = off[last + 1]
                    while lo < hi:
                        mid = (lo + hi) // 2
                        if flat[mid] < target:
                            lo = mid + 1
                        else:
                            hi = mid
                    left = lo
                    while lo < off[last + 1] and flat[lo] == target:
                        lo += 1
                    count += lo - left
                    idx[d] += 1
                else:
                    d += 1
                    idx[d] = off[d]
    return count
