"""Constraint elimination and the spectral step.

Embeddings Y (n x k) must satisfy Y' Pi Y = I and Y' Pi 1 = 0. Rather than
solving a constrained problem, both constraints are eliminated through an
isometry built from q = sqrt(pi)/||sqrt(pi)||: orthonormal (n-1) x k
factors G map bijectively onto valid embeddings via ``expand``, and the
spectral subproblem becomes an ordinary symmetric eigenproblem for an
operator that is applied matrix-free in O(|E| + n) per vector.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, lobpcg

from ccbcut import kernels
from ccbcut.errors import (
    ConstraintViolationError,
    DimensionMismatchError,
    DomainError,
    EigensolverError,
    FormatError,
)
from ccbcut.graph import degree_vector

DENSE_CUTOFF = 200
EIG_TOL = 1e-8
EIG_MAXITER = 5000

_X0_SEED = 0x5EED  # fixed: eigensolver starts are deterministic by design


class ConstraintEliminator:
    """Implicit factors of the constraint-elimination isometry.

    Only q is stored; the n x (n-1) isometry B acts through closed-form
    expressions, never materialized.
    """

    def __init__(self, weights):
        pi = np.asarray(weights.pi, dtype=np.float64)
        if pi.ndim != 1 or pi.size < 2:
            raise DomainError("balance weights must be a vector of length >= 2")
        if (pi <= 0).any() or not np.isfinite(pi).all():
            raise DomainError("balance weights must be strictly positive")
        self.n = pi.size
        self.pi = pi
        self.sqrt_pi = np.sqrt(pi)
        self.inv_sqrt_pi = 1.0 / self.sqrt_pi
        self.q = self.sqrt_pi / np.linalg.norm(self.sqrt_pi)
        self.q1 = float(self.q[0])
        self.q_hat = self.q[1:]

    # -- the isometry and its transpose -------------------------------------

    def _b_apply(self, x):
        """B @ x for x of shape (n-1,) or (n-1, k)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64).T).T
        proj = self.q_hat @ x  # (k,)
        out = np.empty((self.n, x.shape[1]))
        out[0] = proj
        out[1:] = -x + np.outer(self.q_hat, proj / (1.0 + self.q1))
        return out

    def _bt_apply(self, z):
        """B.T @ z for z of shape (n,) or (n, k)."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64).T).T
        zhat = z[1:]
        coeff = (z[0] + self.q_hat @ zhat / (1.0 + self.q1))
        return np.outer(self.q_hat, coeff) - zhat

    def _b_apply_vec(self, x):
        proj = float(self.q_hat @ x)
        out = np.empty(self.n)
        out[0] = proj
        np.multiply(self.q_hat, proj / (1.0 + self.q1), out=out[1:])
        out[1:] -= x
        return out

    def _bt_apply_vec(self, z):
        coeff = z[0] + float(self.q_hat @ z[1:]) / (1.0 + self.q1)
        return self.q_hat * coeff - z[1:]

    # -- the bijection between factors and embeddings -----------------------

    def expand(self, G, check=True):
        """Map an orthonormal (n-1) x k factor to an embedding satisfying
        both constraints."""
        G = np.asarray(G, dtype=np.float64)
        squeeze = G.ndim == 1
        if squeeze:
            G = G[:, None]
        if G.shape[0] != self.n - 1:
            raise DimensionMismatchError(
                f"factor must have {self.n - 1} rows, got {G.shape[0]}")
        if check:
            gram = G.T @ G
            if np.abs(gram - np.eye(G.shape[1])).max() > 1e-8:
                raise ConstraintViolationError("factor columns are not orthonormal")
        Y = self.inv_sqrt_pi[:, None] * self._b_apply(G)
        return Y[:, 0] if squeeze else Y

    def reduce(self, Y, check=True):
        """Inverse of expand: recover the orthonormal factor of a valid
        embedding."""
        Y = np.asarray(Y, dtype=np.float64)
        squeeze = Y.ndim == 1
        if squeeze:
            Y = Y[:, None]
        if Y.shape[0] != self.n:
            raise DimensionMismatchError(
                f"embedding must have {self.n} rows, got {Y.shape[0]}")
        if check:
            piY = self.pi[:, None] * Y
            gram = Y.T @ piY
            bal = piY.sum(axis=0)
            if np.abs(gram - np.eye(Y.shape[1])).max() > 1e-6 or np.abs(bal).max() > 1e-6:
                raise ConstraintViolationError(
                    "embedding violates its orthogonality/balance constraints")
        G = self._bt_apply(self.sqrt_pi[:, None] * Y)
        return G[:, 0] if squeeze else G


def make_eliminator(weights):
    """Construct the eliminator for a set of balance weights."""
    return ConstraintEliminator(weights)


# ---------------------------------------------------------------------------
# operators


@dataclass
class SymmetricOperator:
    """Matrix-free symmetric PSD operator for the eigensolver.

    ``matvec`` must accept (dim,) vectors and (dim, m) column blocks.
    ``diag`` enables Jacobi preconditioning; ``constraint`` columns are
    deflated (the solver works orthogonally to them).
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]
    diag: Optional[np.ndarray] = None
    constraint: Optional[np.ndarray] = None

    def apply(self, x):
        return self.matvec(x)


def _scaled_laplacian_closure(elim, g, gamma):
    """inv_sqrt_pi * L_hat * inv_sqrt_pi application, where L_hat is the
    Laplacian of the gamma-reweighted graph."""
    gamma = getattr(gamma, "gamma", gamma)  # accept a ReweightState
    if gamma is None:
        w, deg = g.weights, g.degrees
    else:
        w = g.weights * np.asarray(gamma, dtype=np.float64)
        deg = kernels.accumulate_degrees(g.rows, g.cols, w, g.n)
    isp = elim.inv_sqrt_pi

    def matvec(x):
        return kernels.scaled_laplacian_matvec(g.rows, g.cols, w, deg, isp, x)

    return matvec, deg


def apply_reduced_operator(elim, g, gamma, x):
    """Apply B' inv_sqrt(Pi) L_hat inv_sqrt(Pi) B without forming any dense
    matrix: expand x through B, apply the scaled Laplacian, contract back.

    O(|E| + n) per column.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != elim.n - 1:
        raise DimensionMismatchError(
            f"expected leading dimension {elim.n - 1}, got {x.shape[0]}")
    if g.n != elim.n:
        raise DimensionMismatchError("graph and eliminator disagree on n")
    gamma = getattr(gamma, "gamma", gamma)
    if gamma is None:
        w, deg = g.weights, g.degrees
    else:
        w = g.weights * np.asarray(gamma, dtype=np.float64)
        deg = kernels.accumulate_degrees(g.rows, g.cols, w, g.n)
    if x.ndim == 1:
        return kernels.eliminated_apply(g.rows, g.cols, w, deg,
                                        elim.inv_sqrt_pi, elim.q_hat,
                                        elim.q1, x)
    r = kernels.scaled_laplacian_matvec(g.rows, g.cols, w, deg,
                                        elim.inv_sqrt_pi, elim._b_apply(x))
    return elim._bt_apply(r)


def reduced_operator(elim, g, gamma=None):
    """The (n-1)-dimensional eliminated operator as a SymmetricOperator."""
    scaled, _ = _scaled_laplacian_closure(elim, g, gamma)

    gamma = getattr(gamma, "gamma", gamma)
    if gamma is None:
        w, deg = g.weights, g.degrees
    else:
        w = g.weights * np.asarray(gamma, dtype=np.float64)
        deg = kernels.accumulate_degrees(g.rows, g.cols, w, g.n)

    def matvec(x):
        if x.ndim == 1:
            return kernels.eliminated_apply(g.rows, g.cols, w, deg,
                                            elim.inv_sqrt_pi, elim.q_hat,
                                            elim.q1, x)
        return elim._bt_apply(scaled(elim._b_apply(x)))

    return SymmetricOperator(dim=elim.n - 1, matvec=matvec)


def scaled_laplacian_operator(elim, g, gamma=None):
    """The n-dimensional scaled Laplacian with the trivial direction q
    deflated; spectrally identical to reduced_operator on q's complement
    but cheaper per apply (no expansion/contraction)."""
    scaled, deg = _scaled_laplacian_closure(elim, g, gamma)
    diag = deg / elim.pi
    return SymmetricOperator(
        dim=elim.n,
        matvec=scaled,
        diag=diag,
        constraint=elim.q[:, None].copy(),
    )


# ---------------------------------------------------------------------------
# eigensolver


def _fix_signs(vecs):
    """Deterministic sign convention: largest-magnitude entry positive."""
    idx = np.abs(vecs).argmax(axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _dense_solve(op, k):
    A = op.apply(np.eye(op.dim))
    A = 0.5 * (A + A.T)
    if op.constraint is not None:
        # shift deflation: push the constrained directions above the part of
        # the spectrum we return
        C = op.constraint
        shift = 2.0 * np.abs(A).sum(axis=1).max() + 1.0
        A = A + shift * (C @ C.T)
    vals, vecs = np.linalg.eigh(A)
    return vals[:k], vecs[:, :k]


DENSE_RESCUE_LIMIT = 4096


def eigensolve_smallest(op, k, tol=EIG_TOL, maxiter=EIG_MAXITER,
                        dense_cutoff=DENSE_CUTOFF, x0=None,
                        dense_rescue_limit=DENSE_RESCUE_LIMIT):
    """k smallest eigenpairs of a SymmetricOperator.

    Dense eigendecomposition below ``dense_cutoff``; otherwise a block
    iterative solve (LOBPCG) with Jacobi preconditioning when the operator
    carries its diagonal, padded with a few guard vectors for convergence.
    Returns (values ascending, orthonormal vectors with the deterministic
    sign convention, iteration count).

    If the iterative residuals miss tol * max(1, value) after the
    iteration cap, moderate dimensions are rescued by the dense path;
    beyond that EigensolverError is raised.
    """
    usable = op.dim - (0 if op.constraint is None else op.constraint.shape[1])
    if not 1 <= k <= usable:
        raise DomainError(f"k must lie in [1, {usable}], got {k}")
    if op.dim <= dense_cutoff:
        vals, vecs = _dense_solve(op, k)
        return vals, _fix_signs(vecs), 0

    pad = min(4, usable - k)
    block = k + pad
    rng = np.random.default_rng(_X0_SEED)
    if x0 is None:
        X = rng.standard_normal((op.dim, block))
    else:
        X = np.array(x0, dtype=np.float64)
        if X.shape != (op.dim, k):
            raise DimensionMismatchError("warm start has the wrong shape")
        if pad:
            X = np.hstack([X, rng.standard_normal((op.dim, pad))])
    X, _ = np.linalg.qr(X)

    A = LinearOperator((op.dim, op.dim), matvec=op.matvec, matmat=op.matvec,
                       dtype=np.float64)
    M = None
    if op.diag is not None:
        dinv = 1.0 / np.maximum(op.diag, 1e-300)

        def _precondition(v):
            return dinv * v if v.ndim == 1 else dinv[:, None] * v

        M = LinearOperator((op.dim, op.dim), matvec=_precondition,
                           matmat=_precondition, dtype=np.float64)
    import warnings

    def _attempt(X0, iters_budget):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # lobpcg warns instead of raising
            vals, vecs, history = lobpcg(A, X0, M=M, Y=op.constraint, tol=tol,
                                         maxiter=iters_budget, largest=False,
                                         retLambdaHistory=True)
        iters = len(history) if isinstance(history, list) else 1
        order = np.argsort(vals)[:k]
        vals, vecs = vals[order], vecs[:, order]
        resid_norms = np.linalg.norm(op.apply(vecs) - vecs * vals, axis=0)
        ok = (resid_norms <= tol * np.maximum(1.0, np.abs(vals))).all()
        return vals, vecs, iters, ok, resid_norms

    # a stalled run is cut short early when the dense rescue is available
    first_budget = min(maxiter, 500) if op.dim <= dense_rescue_limit else maxiter
    try:
        vals, vecs, iters, ok, resid_norms = _attempt(X, first_budget)
        if not ok and first_budget < maxiter and op.dim > dense_rescue_limit:
            vals, vecs, more, ok, resid_norms = _attempt(vecs, maxiter - first_budget)
            iters += more
    except (ValueError, np.linalg.LinAlgError):
        # scipy's block solver can fail internally on ill-conditioned inputs
        ok, iters, resid_norms = False, maxiter, None
    if not ok:
        if op.dim <= dense_rescue_limit:
            vals, vecs = _dense_solve(op, k)
            return vals, _fix_signs(vecs), iters
        raise EigensolverError(
            f"residuals {resid_norms} exceed tolerance after {maxiter} iterations")
    return vals, _fix_signs(vecs), iters


def solve_weighted_step(g, gamma, k, weights, *, tol=EIG_TOL,
                        dense_cutoff=DENSE_CUTOFF, maxiter=EIG_MAXITER,
                        warm_start=None):
    """One spectral step: the embedding minimizing the gamma-weighted
    quadratic objective under both constraints.

    Returns (Y, eigenvalues, iteration count). ``warm_start`` may be the
    previous step's embedding.
    """
    if not 1 <= k <= g.n - 1:
        raise DomainError(f"k must lie in [1, n-1] = [1, {g.n - 1}], got {k}")
    elim = make_eliminator(weights)
    # normalize the multipliers: the eigenvectors are invariant and a sane
    # operator norm keeps the residual tolerance reachable
    gamma = getattr(gamma, "gamma", gamma)
    scale = 1.0
    if gamma is not None:
        gamma = np.asarray(gamma, dtype=np.float64)
        scale = float(gamma.max())
        if not np.isfinite(scale) or scale <= 0:
            raise DomainError("edge multipliers must be positive and finite")
        gamma = gamma / scale
    if g.n - 1 <= dense_cutoff:
        op = reduced_operator(elim, g, gamma)
        vals, U, iters = eigensolve_smallest(op, k, tol=tol, maxiter=maxiter,
                                             dense_cutoff=dense_cutoff)
    else:
        op = scaled_laplacian_operator(elim, g, gamma)
        x0 = None
        if warm_start is not None:
            x0 = elim.sqrt_pi[:, None] * np.asarray(warm_start, dtype=np.float64)
        vals, vecs, iters = eigensolve_smallest(op, k, tol=tol, maxiter=maxiter,
                                                dense_cutoff=dense_cutoff, x0=x0)
        U = _fix_signs(elim._bt_apply(vecs))
    Y = elim.expand(U, check=False)
    return Y, vals * scale, iters


# ---------------------------------------------------------------------------
# embedding file format


def write_embedding(Y, path, k, tau, mode):
    """Embedding file: header line ``k tau mode``, then one comma-separated
    row of k coordinates per vertex."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64).T).T
    with open(path, "w") as fh:
        fh.write(f"{int(k)} {tau:.12g} {mode}\n")
        for row in Y:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_embedding(path):
    """Read the embedding format; returns (Y, k, tau, mode)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty embedding file")
    head = lines[0].split()
    if len(head) != 3:
        raise FormatError(f"{path}: header must be 'k tau mode'")
    try:
        k, tau = int(head[0]), float(head[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header {lines[0]!r}") from exc
    mode = head[2]
    try:
        Y = np.asarray([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: bad embedding row") from exc
    if Y.shape[1] != k:
        raise FormatError(f"{path}: header promises {k} columns, found {Y.shape[1]}")
    return Y, k, tau, mode
