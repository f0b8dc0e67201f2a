# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot kernels (Laguerre recurrences over
radial grids). Mirrors lgpairs._kernels_py; see that module for the
contract docstrings."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, lgamma, log, sqrt

cnp.import_array()

BACKEND = "compiled"


def laguerre_batch(int nmax, double alpha, cnp.ndarray x_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nmax + 1, n))
    cdef Py_ssize_t i
    cdef int k
    cdef double c1, c2, invk
    for i in range(n):
        out[0, i] = 1.0
    if nmax >= 1:
        for i in range(n):
            out[1, i] = (1.0 + alpha) - x[i]
    # k-outer keeps the three active rows streaming through cache
    for k in range(2, nmax + 1):
        c1 = 2.0 * k - 1.0 + alpha
        c2 = k - 1.0 + alpha
        invk = 1.0 / k
        for i in range(n):
            out[k, i] = ((c1 - x[i]) * out[k - 1, i] - c2 * out[k - 2, i]) * invk
    return out


def lg_radial_basis(int pmax, int ell, double w, cnp.ndarray r_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.ascontiguousarray(r_in, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((pmax + 1, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n)
    cdef double a = ell if ell >= 0 else -ell
    cdef Py_ssize_t i
    cdef int k, p
    cdef double rw, amp, c1, c2, invk, norm
    for i in range(n):
        rw = r[i] / w
        x[i] = 2.0 * rw * rw
        if a != 0.0:
            amp = exp(a * log(sqrt(2.0) * rw) - rw * rw)
        else:
            amp = exp(-rw * rw)
        out[0, i] = amp
    if pmax >= 1:
        for i in range(n):
            out[1, i] = ((1.0 + a) - x[i]) * out[0, i]
    for k in range(2, pmax + 1):
        c1 = 2.0 * k - 1.0 + a
        c2 = k - 1.0 + a
        invk = 1.0 / k
        for i in range(n):
            out[k, i] = ((c1 - x[i]) * out[k - 1, i] - c2 * out[k - 2, i]) * invk
    for p in range(pmax + 1):
        norm = sqrt(2.0 * exp(lgamma(p + 1.0) - lgamma(p + a + 1.0)) / 3.141592653589793) / w
        for i in range(n):
            out[p, i] *= norm
    return out
