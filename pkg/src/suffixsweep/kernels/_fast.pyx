# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (see _ref.py for the reference)."""

import numpy as np

cimport numpy as cnp

OPEN_END = 2**62


def osa_distance(cnp.int64_t[::1] a, cnp.int64_t[::1] b):
    cdef Py_ssize_t la = a.shape[0]
    cdef Py_ssize_t lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf0 = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf1 = np.zeros(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf2 = np.zeros(lb + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] prev2 = buf2
    cdef cnp.int64_t[::1] prev = buf0
    cdef cnp.int64_t[::1] cur = buf1
    cdef cnp.int64_t[::1] tmp
    cdef Py_ssize_t i, j
    cdef cnp.int64_t ai, cost, best, cand
    for i in range(1, la + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j] + 1
            cand = cur[j - 1] + 1
            if cand < best:
                best = cand
            cand = prev[j - 1] + cost
            if cand < best:
                best = cand
            if i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == b[j - 1]:
                cand = prev2[j - 2] + 1
                if cand < best:
                    best = cand
            cur[j] = best
        tmp = prev2
        prev2 = prev
        prev = cur
        cur = tmp
    return prev[lb]


def count_active(cnp.int64_t[::1] starts, cnp.int64_t[::1] ends, long long t):
    cdef Py_ssize_t i, n = starts.shape[0]
    cdef long long count = 0
    for i in range(n):
        if starts[i] <= t <= ends[i]:
            count += 1
    return count
