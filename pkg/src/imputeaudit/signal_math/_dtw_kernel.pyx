# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Banded DTW dynamic program, compiled variant of _dtw_py.dtw."""

from libc.math cimport fabs

import numpy as np

cdef double _INF = float("inf")


def dtw(const double[::1] a, const double[::1] b, bint squared, Py_ssize_t band):
    """Cost of the best monotone alignment between sequences a and b.

    band < 0 means unbanded; otherwise cells with |i - j| > band are
    unreachable. The caller guarantees non-empty inputs and a feasible
    band, so the final cell is always reachable.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef double[::1] row0 = np.full(m, _INF)
    cdef double[::1] row1 = np.full(m, _INF)
    cdef double* prev = &row0[0]
    cdef double* curr = &row1[0]
    cdef double* tmp
    cdef Py_ssize_t i, j, lo, hi
    cdef double d, best, ai
    with nogil:
        for i in range(n):
            if band < 0:
                lo = 0
                hi = m - 1
            else:
                lo = i - band
                if lo < 0:
                    lo = 0
                hi = i + band
                if hi > m - 1:
                    hi = m - 1
            for j in range(m):
                curr[j] = _INF
            ai = a[i]
            for j in range(lo, hi + 1):
                d = ai - b[j]
                if squared:
                    d = d * d
                else:
                    d = fabs(d)
                if i == 0 and j == 0:
                    best = 0.0
                elif i == 0:
                    best = curr[j - 1]
                elif j == 0:
                    best = prev[0]
                else:
                    best = prev[j]
                    if curr[j - 1] < best:
                        best = curr[j - 1]
                    if prev[j - 1] < best:
                        best = prev[j - 1]
                curr[j] = d + best
            tmp = prev
            prev = curr
            curr = tmp
    return prev[m - 1]
