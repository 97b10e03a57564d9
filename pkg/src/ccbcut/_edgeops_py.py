"""Pure-numpy edge kernels (fallback when the compiled extension is absent).

All functions take the canonical edge arrays of a graph: ``rows``/``cols``
are int64 endpoint indices with rows[e] < cols[e], ``w`` the per-edge
weights. Vectors/matrices are float64; 2-D inputs are treated column-wise.
"""

import numpy as np

BACKEND = "python"


def accumulate_degrees(rows, cols, w, n):
    return np.bincount(rows, weights=w, minlength=n) + np.bincount(
        cols, weights=w, minlength=n
    )


def laplacian_matvec(rows, cols, w, deg, x, out=None):
    """Apply the graph Laplacian: out = deg*x - W x, edge-wise in O(|E|)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    X = x[:, None] if squeeze else x
    n, k = X.shape
    if out is None:
        out = np.empty_like(X)
    for c in range(k):
        wx = np.bincount(rows, weights=w * X[cols, c], minlength=n)
        wx += np.bincount(cols, weights=w * X[rows, c], minlength=n)
        out[:, c] = deg * X[:, c] - wx
    return out[:, 0] if squeeze else out


def scaled_laplacian_matvec(rows, cols, w, deg, scale, x, out=None):
    """out = scale * L(scale * x)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        t = scale * x
        wx = np.bincount(rows, weights=w * t[cols], minlength=deg.shape[0])
        wx += np.bincount(cols, weights=w * t[rows], minlength=deg.shape[0])
        res = scale * (deg * t - wx)
        if out is None:
            return res
        out[:] = res
        return out
    res = laplacian_matvec(rows, cols, w, deg, scale[:, None] * x, out=out)
    res *= scale[:, None]
    return res


def eliminated_apply(rows, cols, w, deg, isp, q_hat, q1, x):
    """Single-vector apply of the constraint-eliminated operator."""
    n = deg.shape[0]
    proj = q_hat @ x
    p = np.empty(n)
    p[0] = proj
    np.multiply(q_hat, proj / (1.0 + q1), out=p[1:])
    p[1:] -= x
    p *= isp
    wx = np.bincount(rows, weights=w * p[cols], minlength=n)
    wx += np.bincount(cols, weights=w * p[rows], minlength=n)
    r = isp * (deg * p - wx)
    coeff = r[0] + (q_hat @ r[1:]) / (1.0 + q1)
    return q_hat * coeff - r[1:]


def edge_sqnorms(rows, cols, Y, out=None):
    """Per-edge squared Euclidean norm of the row difference Y[i]-Y[j]."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    d = Y[rows] - Y[cols]
    res = np.einsum("ec,ec->e", d, d)
    if out is None:
        return res
    out[:] = res
    return out


def edge_abs_powsums(rows, cols, Y, tau, out=None):
    """Per-edge sum over columns of |Y[i,c]-Y[j,c]|**tau."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    res = np.abs(Y[rows] - Y[cols]) ** tau
    res = res.sum(axis=1)
    if out is None:
        return res
    out[:] = res
    return out
