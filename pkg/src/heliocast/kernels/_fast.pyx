# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the scoring hot loops (see _ref.py for the contract)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def mean_pairwise_abs(values):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.sort(
        np.ascontiguousarray(values, dtype=np.float64)
    )
    cdef Py_ssize_t m = x.shape[0]
    if m < 2:
        return 0.0
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(m):
        acc += (2.0 * i - (m - 1)) * x[i]
    return 2.0 * acc / (m * (m - 1.0))


def band_depth(curves):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(
        curves, dtype=np.float64
    )
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t n_time = c.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] depth = np.zeros(n)
    if n < 2:
        depth[:] = 1.0
        return depth
    cdef double total_pairs = n * (n - 1) / 2.0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] col = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] order
    cdef Py_ssize_t t, i, lo, hi, mid
    cdef double v, below, above
    for t in range(n_time):
        for i in range(n):
            col[i] = c[i, t]
        order = np.sort(col)
        for i in range(n):
            v = c[i, t]
            # searchsorted left
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if order[mid] < v:
                    lo = mid + 1
                else:
                    hi = mid
            below = lo
            # searchsorted right
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if order[mid] <= v:
                    lo = mid + 1
                else:
                    hi = mid
            above = n - lo
            depth[i] += (
                total_pairs
                - below * (below - 1.0) / 2.0
                - above * (above - 1.0) / 2.0
            )
    for i in range(n):
        depth[i] /= n_time * total_pairs
    return depth
