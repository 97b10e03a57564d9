"""Iteratively reweighted Rayleigh-quotient minimization.

The relaxed balanced-cut objective sums w_ij * ||y_i - y_j||_tau^tau over
all ordered vertex pairs subject to Y' Pi Y = I. It is minimized by
alternating a spectral step (an exact constrained weighted least-squares
solve) with a multiplicative reweighting of the edges; a shrinking
regularizer keeps the weights finite as row differences collapse. Edge
weights start at one, so the first iterate is the classical spectral-
relaxation embedding and no initial guess of Y is needed.
"""

import csv
import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from ccbcut import kernels
from ccbcut.embedding import solve_weighted_step
from ccbcut.errors import (
    DegenerateWeightsError,
    DimensionMismatchError,
    DomainError,
    FormatError,
)

_TINY = 1e-300


@dataclass
class ReweightState:
    """Per-edge multipliers and the regularizer at one outer iteration."""

    gamma: np.ndarray
    epsilon: float
    iteration: int = 0


@dataclass
class IrrqConfig:
    """Solver configuration.

    tau in (0, 2] selects the objective (2 = classical spectral relaxation,
    smaller values push toward piecewise-flat embeddings); k is the number
    of embedding columns; kappa_tilde in (0, 1) positions the regularizer
    schedule between the estimated active-pair count and all ordered edge
    pairs.
    """

    tau: float = 1.0
    k: int = 2
    kappa_tilde: float = 1e-4
    max_iters: int = 50
    rel_cost_tol: float = 0.01
    eig_tol: float = 1e-8
    eig_maxiter: int = 5000
    dense_cutoff: int = 200

    def __post_init__(self):
        if not 0.0 < self.tau <= 2.0:
            raise DomainError(f"tau must lie in (0, 2], got {self.tau}")
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.kappa_tilde < 1.0:
            raise DomainError(f"kappa_tilde must lie in (0, 1), got {self.kappa_tilde}")
        if self.max_iters < 1:
            raise DomainError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_cost_tol < 0:
            raise DomainError("rel_cost_tol must be nonnegative")
        if self.eig_tol <= 0:
            raise DomainError("eig_tol must be positive")


def config_from_file(path, **overrides):
    """Parse a key-value text file ('key = value' or 'key: value' lines,
    '#' comments) into an IrrqConfig; keyword overrides win."""
    values = {}
    typed = {f.name: f.type for f in fields(IrrqConfig)}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, val = line.partition(sep)
                    break
            else:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip()
            if key not in typed:
                raise FormatError(f"{path}:{lineno}: unknown config key {key!r}")
            caster = int if typed[key] in ("int", int) else float
            try:
                values[key] = caster(val.strip())
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad value for {key!r}") from exc
    values.update(overrides)
    return IrrqConfig(**values)


# ---------------------------------------------------------------------------
# objective and updates


def embedding_objective(g, Y, tau):
    """Sum over ordered vertex pairs of w_ij * ||y_i - y_j||_tau^tau,
    computed as twice the sum over stored edges."""
    if not 0.0 < tau <= 2.0:
        raise DomainError(f"tau must lie in (0, 2], got {tau}")
    Y = np.asarray(Y, dtype=np.float64)
    if Y.shape[0] != g.n:
        raise DimensionMismatchError(f"embedding has {Y.shape[0]} rows for n={g.n}")
    pows = kernels.edge_abs_powsums(g.rows, g.cols, Y, tau)
    return float(2.0 * np.dot(g.weights, pows))


def reweight_edges(g, Y, epsilon, tau, clamp=False):
    """Per-edge multipliers (w * ||dy||_2^2 + epsilon^2) ** (tau/2 - 1).

    At tau=2 the exponent is zero and the result is exactly all-ones. A
    zero base with a negative exponent raises DegenerateWeightsError unless
    ``clamp`` floors the base at 1e-300 (with a diagnostic).
    """
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    expo = tau / 2.0 - 1.0
    if expo == 0.0:
        return np.ones(g.num_edges)
    sq = kernels.edge_sqnorms(g.rows, g.cols, np.asarray(Y, dtype=np.float64))
    base = g.weights * sq + epsilon * epsilon
    zero = base <= 0.0
    if zero.any():
        if not clamp:
            raise DegenerateWeightsError(
                "zero residual with zero regularizer under tau < 2")
        warnings.warn("degenerate reweighting base clamped at 1e-300",
                      RuntimeWarning, stacklevel=2)
        base = np.maximum(base, _TINY)
    return base ** expo


def shrink_epsilon(g, Y, epsilon, kappa):
    """New regularizer min(epsilon, r/n) where r is the (kappa+1)-th
    largest distinct value of {sqrt(w_ij) * ||y_i - y_j||_2} over edge
    pairs; saturates at zero when the rank runs past the list."""
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    sq = kernels.edge_sqnorms(g.rows, g.cols, np.asarray(Y, dtype=np.float64))
    resid = np.sqrt(g.weights * sq)
    distinct = np.unique(resid)  # ascending
    rank = int(kappa) + 1
    r = float(distinct[-rank]) if rank <= distinct.size else 0.0
    return min(float(epsilon), r / g.n)


def _kmeans_labels(points, k, seed, restarts=10, max_iter=300):
    """Deterministic k-means labels (shared with the rounding module)."""
    from sklearn.cluster import KMeans

    points = np.atleast_2d(np.asarray(points, dtype=np.float64).T).T
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts,
                max_iter=max_iter, random_state=seed)
    labels = km.fit_predict(points)
    return labels.astype(np.int64), km.cluster_centers_, float(km.inertia_)


def estimate_active_pairs(g, Y, k, seed=0):
    """Twice the number of edges crossing a k-means clustering of the
    embedding rows: the sparsity estimate steering the schedule rank."""
    if k == 1:
        return 0
    labels, _, _ = _kmeans_labels(np.asarray(Y, dtype=np.float64), k, seed)
    crossing = labels[g.rows] != labels[g.cols]
    return int(2 * np.count_nonzero(crossing))


def select_rank(theta_hat, kappa_tilde, edge_count):
    """Map the scale-free knob onto the schedule rank:
    theta_hat + kappa_tilde * (2*edge_count - theta_hat), rounded half-up
    and clamped to [theta_hat, 2*edge_count]."""
    if not 0.0 < kappa_tilde < 1.0:
        raise DomainError(f"kappa_tilde must lie in (0, 1), got {kappa_tilde}")
    raw = theta_hat + kappa_tilde * (2 * edge_count - theta_hat)
    kappa = int(math.floor(raw + 0.5))
    return max(int(theta_hat), min(kappa, 2 * edge_count))


def initial_gamma_from_embedding(g, Y0, tau, epsilon=1.0, formula="regularized"):
    """Edge weights seeded from a user-supplied embedding instead of ones.

    'regularized' applies the standard update to Y0; 'ratio' uses
    ||dy||_tau^tau / ||dy||_2^2 (undefined on coincident rows, which fall
    back to weight one).
    """
    Y0 = np.asarray(Y0, dtype=np.float64)
    if formula == "regularized":
        return reweight_edges(g, Y0, epsilon, tau)
    if formula == "ratio":
        sq = kernels.edge_sqnorms(g.rows, g.cols, Y0)
        pows = kernels.edge_abs_powsums(g.rows, g.cols, Y0, tau)
        gamma = np.ones(g.num_edges)
        nz = sq > 0
        gamma[nz] = pows[nz] / sq[nz]
        return gamma
    raise DomainError(f"unknown initial-weight formula {formula!r}")


# ---------------------------------------------------------------------------
# the outer loop


@dataclass
class TraceRecord:
    iteration: int
    objective: float
    epsilon: float
    eig_iters: int


@dataclass
class IrrqResult:
    embedding: np.ndarray
    objective: float
    trace: list
    kappa: int
    theta_hat: int
    stop_reason: str

    @property
    def iterations(self):
        return len(self.trace)


def irrq_solve(g, cfg, weights, seed=0, *, initial_gamma=None,
               initial_epsilon=1.0, kappa=None, on_iterate=None):
    """Run the reweighted spectral loop.

    Stops when the relative objective change drops below
    cfg.rel_cost_tol, the regularizer reaches zero, or cfg.max_iters
    spectral solves have run. ``kappa`` overrides the estimated schedule
    rank; ``initial_gamma``/``initial_epsilon`` replace the all-ones start.

    Each spectral step minimizes the regularized surrogate, which only
    approaches the true objective as epsilon shrinks, so the raw objective
    need not fall at every step; the returned embedding is the iterate
    with the smallest objective (the trace records all of them). It
    satisfies both constraints to eigensolver tolerance.
    """
    if cfg.k > g.n - 1:
        raise DomainError(f"k must be < n; got k={cfg.k}, n={g.n}")
    m = g.num_edges
    if initial_gamma is None:
        gamma = np.ones(m)
    else:
        gamma = np.asarray(initial_gamma, dtype=np.float64)
        if gamma.shape != (m,):
            raise DimensionMismatchError(f"initial gamma must have shape ({m},)")
        if (gamma <= 0).any():
            raise DomainError("initial gamma must be strictly positive")
    epsilon = float(initial_epsilon)
    if epsilon < 0:
        raise DomainError("initial epsilon must be nonnegative")

    step = lambda gam, warm: solve_weighted_step(
        g, gam, cfg.k, weights, tol=cfg.eig_tol,
        dense_cutoff=cfg.dense_cutoff, maxiter=cfg.eig_maxiter,
        warm_start=warm)

    trace = []
    Y, _, eig_iters = step(gamma, None)
    objective = embedding_objective(g, Y, cfg.tau)
    trace.append(TraceRecord(1, objective, epsilon, eig_iters))
    if on_iterate is not None:
        on_iterate(Y)
    best_Y, best_objective = Y, objective

    theta_hat = estimate_active_pairs(g, Y, cfg.k, seed)
    kappa_val = int(kappa) if kappa is not None else select_rank(
        theta_hat, cfg.kappa_tilde, m)

    stop_reason = "max_iters"
    for it in range(2, cfg.max_iters + 1):
        epsilon = shrink_epsilon(g, Y, epsilon, kappa_val)
        if epsilon <= 0.0:
            stop_reason = "epsilon"
            break
        gamma = reweight_edges(g, Y, epsilon, cfg.tau, clamp=True)
        Y, _, eig_iters = step(gamma, Y)
        new_objective = embedding_objective(g, Y, cfg.tau)
        trace.append(TraceRecord(it, new_objective, epsilon, eig_iters))
        if on_iterate is not None:
            on_iterate(Y)
        if new_objective < best_objective:
            best_Y, best_objective = Y, new_objective
        rel = abs(new_objective - objective) / max(objective, _TINY)
        objective = new_objective
        if rel < cfg.rel_cost_tol:
            stop_reason = "cost"
            break

    return IrrqResult(embedding=best_Y, objective=best_objective, trace=trace,
                      kappa=kappa_val, theta_hat=theta_hat,
                      stop_reason=stop_reason)


TRACE_FIELDS = ("iter", "j_tau", "epsilon", "eig_iters")


def write_trace(trace, path):
    """Trace file: CSV with columns (iter, j_tau, epsilon, eig_iters)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for rec in trace:
            writer.writerow([rec.iteration, f"{rec.objective:.17g}",
                             f"{rec.epsilon:.17g}", rec.eig_iters])
