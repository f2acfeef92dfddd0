# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Every function here has a numpy twin in ``_pykernels``."""

from cython cimport floating
from libc.math cimport exp, sqrt

import numpy as np


cdef extern from "_silu.h":
    void ldf_silu_forward_f32(const float *a, float *out, float *sig, Py_ssize_t n) nogil
    void ldf_silu_backward_f32(const float *g, const float *a, const float *sig, float *out,
                               Py_ssize_t n) nogil


def silu_forward(floating[:, ::1] pre, floating[:, ::1] out, floating[:, ::1] sig):
    cdef Py_ssize_t i, n = pre.shape[0] * pre.shape[1]
    cdef floating *a = &pre[0, 0]
    cdef floating *o = &out[0, 0]
    cdef floating *s = &sig[0, 0]
    if n == 0:
        return
    if floating is float:
        ldf_silu_forward_f32(a, o, s, n)
    else:
        for i in range(n):
            s[i] = 1.0 / (1.0 + exp(-a[i]))
            o[i] = a[i] * s[i]


def silu_backward(floating[:, ::1] grad, floating[:, ::1] pre, floating[:, ::1] sig,
                  floating[:, ::1] out):
    cdef Py_ssize_t i, n = pre.shape[0] * pre.shape[1]
    if n == 0:
        return
    cdef floating *g = &grad[0, 0]
    cdef floating *a = &pre[0, 0]
    cdef floating *s = &sig[0, 0]
    cdef floating *o = &out[0, 0]
    if floating is float:
        ldf_silu_backward_f32(g, a, s, o, n)
    else:
        for i in range(n):
            o[i] = g[i] * (s[i] + a[i] * s[i] * (1 - s[i]))


def adamw_update(floating[::1] param, floating[::1] grad, floating[::1] m, floating[::1] v,
                 double lr, double beta1, double beta2, double eps, double weight_decay,
                 double bc1, double bc2):
    cdef Py_ssize_t i, n = param.shape[0]
    if n == 0:
        return
    cdef floating *p = &param[0]
    cdef floating *g = &grad[0]
    cdef floating *mp = &m[0]
    cdef floating *vp = &v[0]
    cdef double gi, mi, vi, step = lr / bc1, inv_root_bc2 = 1.0 / sqrt(bc2)
    cdef double decay = 1.0 - lr * weight_decay
    for i in range(n):
        gi = g[i]
        mi = beta1 * mp[i] + (1.0 - beta1) * gi
        vi = beta2 * vp[i] + (1.0 - beta2) * gi * gi
        mp[i] = <floating>mi
        vp[i] = <floating>vi
        p[i] = <floating>(p[i] * decay - step * mi / (sqrt(vi) * inv_root_bc2 + eps))


def rbf_pair_sum(double[:, ::1] a, double[:, ::1] b, double gamma, bint skip_diagonal):
    """Sum of exp(-gamma * |a_i - b_j|^2) over all pairs, optionally skipping i == j."""
    cdef Py_ssize_t i, j, k, n = a.shape[0], m = b.shape[0], d = a.shape[1]
    if n == 0 or m == 0:
        return 0.0
    cdef double[::1] dist_buf = np.empty(m)
    cdef double *dist = &dist_buf[0]
    cdef const double *bp = &b[0, 0]
    cdef const double *ai
    cdef double total = 0.0, row, diff, aik
    for i in range(n):
        ai = &a[i, 0]
        for j in range(m):
            dist[j] = 0.0
        for k in range(d):
            aik = ai[k]
            for j in range(m):
                diff = aik - bp[j * d + k]
                dist[j] += diff * diff
        row = 0.0
        for j in range(m):
            row += exp(-gamma * dist[j])
        if skip_diagonal and i < m:
            row -= exp(-gamma * dist[i])
        total += row
    return total
