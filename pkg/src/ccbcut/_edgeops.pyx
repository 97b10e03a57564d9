# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled edge kernels: fused single-pass versions of _edgeops_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

BACKEND = "compiled"


def accumulate_degrees(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                       const double[::1] w, Py_ssize_t n):
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t e, m = rows.shape[0]
    for e in range(m):
        o[rows[e]] += w[e]
        o[cols[e]] += w[e]
    return out


def laplacian_matvec(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                     const double[::1] w, const double[::1] deg, x, out=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    X = x[:, None] if squeeze else x
    if out is None:
        out = np.empty_like(X)
    cdef const double[:, ::1] Xv = X
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t e, c, i, j, m = rows.shape[0]
    cdef Py_ssize_t n = Xv.shape[0], k = Xv.shape[1]
    cdef double we
    for i in range(n):
        for c in range(k):
            ov[i, c] = deg[i] * Xv[i, c]
    for e in range(m):
        i = rows[e]
        j = cols[e]
        we = w[e]
        for c in range(k):
            ov[i, c] -= we * Xv[j, c]
            ov[j, c] -= we * Xv[i, c]
    return out[:, 0] if squeeze else out


def scaled_laplacian_matvec(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                            const double[::1] w, const double[::1] deg,
                            const double[::1] scale, x, out=None):
    """out = scale * L(scale * x), fused: one pass over vertices and edges."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        return _scaled_lap_vec(rows, cols, w, deg, scale, x,
                               np.empty_like(x) if out is None else out)
    X = x
    if out is None:
        out = np.empty_like(X)
    t = np.empty_like(X)
    cdef const double[:, ::1] Xv = X
    cdef double[:, ::1] tv = t
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t e, c, i, j, m = rows.shape[0]
    cdef Py_ssize_t n = Xv.shape[0], k = Xv.shape[1]
    cdef double we
    for i in range(n):
        for c in range(k):
            tv[i, c] = scale[i] * Xv[i, c]
            ov[i, c] = deg[i] * tv[i, c]
    for e in range(m):
        i = rows[e]
        j = cols[e]
        we = w[e]
        for c in range(k):
            ov[i, c] -= we * tv[j, c]
            ov[j, c] -= we * tv[i, c]
    for i in range(n):
        for c in range(k):
            ov[i, c] *= scale[i]
    return out


cdef _scaled_lap_vec(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                     const double[::1] w, const double[::1] deg,
                     const double[::1] scale, const double[::1] x, out):
    cdef double[::1] ov = out
    t = np.empty(x.shape[0], dtype=np.float64)
    cdef double[::1] tv = t
    cdef Py_ssize_t e, i, j, m = rows.shape[0], n = x.shape[0]
    cdef double we
    for i in range(n):
        tv[i] = scale[i] * x[i]
        ov[i] = deg[i] * tv[i]
    for e in range(m):
        i = rows[e]
        j = cols[e]
        we = w[e]
        ov[i] -= we * tv[j]
        ov[j] -= we * tv[i]
    for i in range(n):
        ov[i] *= scale[i]
    return out


def eliminated_apply(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols,
                     const double[::1] w, const double[::1] deg,
                     const double[::1] isp, const double[::1] q_hat,
                     double q1, const double[::1] x):
    """Fused single-vector apply of the constraint-eliminated operator:
    expand through the isometry, apply scale*L*scale, contract back."""
    cdef Py_ssize_t e, i, j, m = rows.shape[0], n = deg.shape[0]
    cdef double proj = 0.0, we, coeff
    p = np.empty(n, dtype=np.float64)
    r = np.empty(n, dtype=np.float64)
    cdef double[::1] pv = p
    cdef double[::1] rv = r
    for i in range(n - 1):
        proj += q_hat[i] * x[i]
    coeff = proj / (1.0 + q1)
    pv[0] = isp[0] * proj
    for i in range(n - 1):
        pv[i + 1] = isp[i + 1] * (q_hat[i] * coeff - x[i])
    for i in range(n):
        rv[i] = deg[i] * pv[i]
    for e in range(m):
        i = rows[e]
        j = cols[e]
        we = w[e]
        rv[i] -= we * pv[j]
        rv[j] -= we * pv[i]
    for i in range(n):
        rv[i] *= isp[i]
    proj = 0.0
    for i in range(n - 1):
        proj += q_hat[i] * rv[i + 1]
    coeff = rv[0] + proj / (1.0 + q1)
    out = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] ov = out
    for i in range(n - 1):
        ov[i] = q_hat[i] * coeff - rv[i + 1]
    return out


def edge_sqnorms(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols, Y, out=None):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    cdef Py_ssize_t m = rows.shape[0]
    if out is None:
        out = np.empty(m, dtype=np.float64)
    cdef const double[:, ::1] Yv = Y
    cdef double[::1] ov = out
    cdef Py_ssize_t e, c, k = Yv.shape[1]
    cdef double acc, d
    for e in range(m):
        acc = 0.0
        for c in range(k):
            d = Yv[rows[e], c] - Yv[cols[e], c]
            acc += d * d
        ov[e] = acc
    return out


def edge_abs_powsums(const cnp.int64_t[::1] rows, const cnp.int64_t[::1] cols, Y,
                     double tau, out=None):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    cdef Py_ssize_t m = rows.shape[0]
    if out is None:
        out = np.empty(m, dtype=np.float64)
    cdef const double[:, ::1] Yv = Y
    cdef double[::1] ov = out
    cdef Py_ssize_t e, c, k = Yv.shape[1]
    cdef double acc
    for e in range(m):
        acc = 0.0
        for c in range(k):
            acc += pow(fabs(Yv[rows[e], c] - Yv[cols[e], c]), tau)
        ov[e] = acc
    return out
