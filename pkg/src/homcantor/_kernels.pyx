# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled int64 versions of the interval kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def merge_sorted(const i64[::1] lo, const i64[::1] hi):
    cdef Py_ssize_t n = lo.shape[0], i, m = 0
    out_lo = np.empty(n, dtype=np.int64)
    out_hi = np.empty(n, dtype=np.int64)
    cdef i64[::1] olo = out_lo
    cdef i64[::1] ohi = out_hi
    cdef i64 cur_lo, cur_hi
    if n == 0:
        return out_lo, out_hi
    with nogil:
        cur_lo = lo[0]
        cur_hi = hi[0]
        for i in range(1, n):
            if lo[i] <= cur_hi:
                if hi[i] > cur_hi:
                    cur_hi = hi[i]
            else:
                olo[m] = cur_lo
                ohi[m] = cur_hi
                m += 1
                cur_lo = lo[i]
                cur_hi = hi[i]
        olo[m] = cur_lo
        ohi[m] = cur_hi
        m += 1
    return out_lo[:m].copy(), out_hi[:m].copy()


cdef inline Py_ssize_t _last_le(const i64[::1] lo, i64 x) nogil:
    # index of the last lo[k] <= x, or -1
    cdef Py_ssize_t a = 0, b = lo.shape[0], mid
    while a < b:
        mid = (a + b) >> 1
        if lo[mid] <= x:
            a = mid + 1
        else:
            b = mid
    return a - 1


def covered_mask(const i64[::1] points, const i64[::1] lo, const i64[::1] hi):
    cdef Py_ssize_t n = points.shape[0], i, k
    out = np.zeros(n, dtype=np.bool_)
    cdef cnp.npy_bool[::1] o = out
    if lo.shape[0] == 0:
        return out
    with nogil:
        for i in range(n):
            k = _last_le(lo, points[i])
            if k >= 0 and points[i] <= hi[k]:
                o[i] = 1
    return out


def reach_witness(const i64[::1] points, const i64[::1] lo, const i64[::1] hi):
    cdef Py_ssize_t n = lo.shape[0], m = points.shape[0], i, k
    out = np.full(m, -1, dtype=np.int64)
    cdef i64[::1] o = out
    if n == 0:
        return out
    reach_a = np.empty(n, dtype=np.int64)
    arg_a = np.empty(n, dtype=np.int64)
    cdef i64[::1] reach = reach_a
    cdef i64[::1] arg = arg_a
    with nogil:
        reach[0] = hi[0]
        arg[0] = 0
        for i in range(1, n):
            if hi[i] > reach[i - 1]:
                reach[i] = hi[i]
                arg[i] = i
            else:
                reach[i] = reach[i - 1]
                arg[i] = arg[i - 1]
        for i in range(m):
            k = _last_le(lo, points[i])
            if k >= 0 and points[i] <= reach[k]:
                o[i] = arg[k]
    return out
