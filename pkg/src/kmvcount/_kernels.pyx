# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled insertion kernels for the bucketed k-minimum store.

State layout shared with ``_kernels_py``: ``vals`` is an (m, k) float64
array whose row i holds ``counts[i]`` ascending, pairwise distinct values;
slots past ``counts[i]`` are unused.
"""
from libc.stdint cimport int64_t

BACKEND = "cython"


cdef inline bint _insert(double[:, ::1] vals, int64_t[::1] counts,
                         Py_ssize_t m, Py_ssize_t k, double x) noexcept nogil:
    cdef Py_ssize_t i = <Py_ssize_t>(x * m)
    cdef Py_ssize_t c, lo, hi, mid, j
    if i >= m:
        i = m - 1
    c = counts[i]
    if c == k and x >= vals[i, k - 1]:
        return False
    lo = 0
    hi = c
    while lo < hi:
        mid = (lo + hi) >> 1
        if vals[i, mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < c and vals[i, lo] == x:
        return False
    if c < k:
        j = c
        counts[i] = c + 1
    else:
        j = k - 1
    while j > lo:
        vals[i, j] = vals[i, j - 1]
        j -= 1
    vals[i, lo] = x
    return True


def insert_value(double[:, ::1] vals, int64_t[::1] counts, double x):
    """Insert one unit value; return True if the store changed."""
    return _insert(vals, counts, vals.shape[0], vals.shape[1], x)


def insert_values(double[:, ::1] vals, int64_t[::1] counts, const double[::1] xs):
    """Insert every value of ``xs`` in order."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m = vals.shape[0]
    cdef Py_ssize_t k = vals.shape[1]
    cdef Py_ssize_t t
    with nogil:
        for t in range(n):
            _insert(vals, counts, m, k, xs[t])
