# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, sqrt, M_PI

cnp.import_array()

cdef double _BIG = 1e150


def hermite_table(Py_ssize_t n_max, x):
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t npts = xs.shape[0]
    out_arr = np.empty((n_max, npts))
    if n_max == 0:
        return out_arr
    cdef double[:, ::1] out = out_arr
    cdef double[::1] log_scale = np.empty(npts)
    cdef double[::1] scale = np.empty(npts)
    cdef double[::1] prev = np.zeros(npts)
    cdef double[::1] cur = np.ones(npts)
    cdef double log_big = log(_BIG)
    cdef double lpq = 0.25 * log(M_PI)
    cdef double c1, c2, nxt
    cdef Py_ssize_t n, p

    for p in range(npts):
        log_scale[p] = -0.5 * xs[p] * xs[p] - lpq
        scale[p] = exp(log_scale[p])
        out[0, p] = scale[p]
    for n in range(1, n_max):
        c1 = sqrt(2.0 / n)
        c2 = sqrt((n - 1.0) / n)
        for p in range(npts):
            nxt = c1 * xs[p] * cur[p] - c2 * prev[p]
            prev[p] = cur[p]
            cur[p] = nxt
            if fabs(nxt) > _BIG:
                cur[p] = nxt / _BIG
                prev[p] = prev[p] / _BIG
                log_scale[p] += log_big
                scale[p] = exp(log_scale[p])
            out[n, p] = cur[p] * scale[p]
    return out_arr
