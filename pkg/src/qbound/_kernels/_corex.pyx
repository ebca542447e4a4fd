# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot DP kernel."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def bellman_sweep(cnp.ndarray[cnp.float64_t, ndim=1] v,
                  cnp.ndarray[cnp.float64_t, ndim=2] reward,
                  cnp.ndarray[cnp.float64_t, ndim=3] py,
                  cnp.ndarray[cnp.int32_t, ndim=4] idx,
                  cnp.ndarray[cnp.float64_t, ndim=4] wgt):
    """Same contract as the numpy fallback: one Bellman sweep, returning
    (v_next, best_action)."""
    cdef Py_ssize_t n = reward.shape[0]
    cdef Py_ssize_t m = reward.shape[1]
    cdef Py_ssize_t ny = py.shape[2]
    cdef Py_ssize_t nk = idx.shape[3]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_next = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] best = np.empty(n, dtype=np.int64)
    cdef double[:] vv = v
    cdef double[:, :] rr = reward
    cdef double[:, :, :] pp = py
    cdef int[:, :, :, :] ii = idx
    cdef double[:, :, :, :] ww = wgt
    cdef double[:] out_v = v_next
    cdef long long[:] out_b = best
    cdef Py_ssize_t i, j, y, k
    cdef double q, ev, interp, bestval
    cdef Py_ssize_t bestarg

    with nogil:
        for i in range(n):
            bestval = -1e300
            bestarg = 0
            for j in range(m):
                ev = 0.0
                for y in range(ny):
                    interp = 0.0
                    for k in range(nk):
                        interp += ww[i, j, y, k] * vv[ii[i, j, y, k]]
                    ev += pp[i, j, y] * interp
                q = rr[i, j] + ev
                if q > bestval:
                    bestval = q
                    bestarg = j
            out_v[i] = bestval
            out_b[i] = bestarg
    return v_next, best
