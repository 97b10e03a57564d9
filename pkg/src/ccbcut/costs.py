"""Cut-cost families, the bifurcation toy graph, and a brute-force oracle.

Three cost families are implemented exactly:

* plain 2-way and multiway cut costs;
* the Buehler-Hein family, normalizing a 2-way cut by ``bh_balance``;
* the compassionately conservative balanced (CCB) family, a multiway cost
  whose per-block denominators interpolate between no normalization
  (tau -> 0) and ratio/normalized cuts (tau = 2).

``brute_force_min`` enumerates all k-block partitions and is the
correctness oracle for every solver in the package.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ccbcut.errors import (
    DimensionMismatchError,
    DomainError,
    EnumerationLimitError,
    FormatError,
    PartitionError,
)
from ccbcut.graph import (
    NORMALIZED,
    RATIO,
    BalanceWeights,
    balance_weights,
    build_graph,
    laplacian_apply,
)

BRUTE_FORCE_GUARD = 1e7


# ---------------------------------------------------------------------------
# partitions


class PartitionK:
    """Assignment of n vertices to k nonempty blocks labeled 0..k-1."""

    __slots__ = ("labels", "k")

    def __init__(self, labels, k=None):
        labels = np.array(labels, dtype=np.int64, copy=True)
        if labels.ndim != 1 or labels.size == 0:
            raise PartitionError("labels must be a nonempty 1-D sequence")
        if k is None:
            k = int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= k:
            raise PartitionError(f"labels must lie in [0, {k})")
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            raise PartitionError(f"block {empty} of {k} is empty")
        labels.setflags(write=False)
        self.labels = labels
        self.k = int(k)

    @property
    def n(self):
        return int(self.labels.size)

    def block_sizes(self):
        return np.bincount(self.labels, minlength=self.k)

    def canonical(self):
        """Relabel blocks by first occurrence; partition-equality helper."""
        return PartitionK(canonical_labels(self.labels), self.k)

    def same_partition(self, other):
        return self.k == other.k and np.array_equal(
            canonical_labels(self.labels), canonical_labels(other.labels))

    def __repr__(self):
        return f"PartitionK(k={self.k}, labels={self.labels.tolist()})"


def canonical_labels(labels):
    """First-occurrence renumbering: label of the first vertex becomes 0,
    the next unseen label 1, and so on."""
    labels = np.asarray(labels, dtype=np.int64)
    mapping = {}
    out = np.empty_like(labels)
    for idx, lab in enumerate(labels):
        lab = int(lab)
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[idx] = mapping[lab]
    return out


def write_partition(part, path):
    """Partition text format: header ``n k``, then one label per line."""
    with open(path, "w") as fh:
        fh.write(f"{part.n} {part.k}\n")
        for lab in part.labels:
            fh.write(f"{int(lab)}\n")


def read_partition(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty partition file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"{path}: header must be 'n k'")
    try:
        n, k = int(head[0]), int(head[1])
        labels = [int(ln) for ln in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: malformed partition file") from exc
    if len(labels) != n:
        raise FormatError(f"{path}: header promises {n} labels, found {len(labels)}")
    try:
        return PartitionK(labels, k)
    except PartitionError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# balance normalizers


def bh_balance(frac, p):
    """Buehler-Hein normalizer: symmetric in frac <-> 1-frac, equals
    4*frac*(1-frac) at p=2, and tends to sqrt(4*frac*(1-frac)) as p grows.

    Evaluated in log space so that large p stays finite.
    """
    if not 0.0 < frac < 1.0:
        raise DomainError(f"fraction must lie in (0,1), got {frac}")
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p}")
    inv = 1.0 / (p - 1.0)
    a = math.exp(-inv * math.log(frac))
    b = math.exp(-inv * math.log(1.0 - frac))
    return math.exp(p * math.log(2.0) - (p - 1.0) * math.log(a + b))


def cc_balance(frac, tau):
    """Conservative normalizer: 2**(1+tau/2) / (frac**(-tau/2) +
    (1-frac)**(-tau/2)). Equals bh_balance(frac, 2) at tau=2 and tends to 1
    as tau -> 0 (no balance penalty at all)."""
    if not 0.0 < frac < 1.0:
        raise DomainError(f"fraction must lie in (0,1), got {frac}")
    if not tau > 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    t = tau / 2.0
    return 2.0 ** (1.0 + t) / (frac ** -t + (1.0 - frac) ** -t)


# ---------------------------------------------------------------------------
# cut costs


def _crossing_mask(g, labels):
    return labels[g.rows] != labels[g.cols]


def cut_cost(g, part):
    """Total weight of edges crossing a 2-way partition."""
    if part.k != 2:
        raise PartitionError(f"cut_cost needs k=2, got k={part.k}")
    _check_len(g, part)
    return float(g.weights[_crossing_mask(g, part.labels)].sum())


def multiway_cut(g, part):
    """Half the sum of per-block boundary weights, i.e. the total weight of
    all crossing edges."""
    _check_len(g, part)
    return float(g.weights[_crossing_mask(g, part.labels)].sum())


def _block_cuts_and_masses(g, part, pi):
    labels = part.labels
    cross = _crossing_mask(g, labels)
    li = labels[g.rows[cross]]
    lj = labels[g.cols[cross]]
    wc = g.weights[cross]
    cuts = np.bincount(li, weights=wc, minlength=part.k)
    cuts += np.bincount(lj, weights=wc, minlength=part.k)
    masses = np.bincount(labels, weights=pi, minlength=part.k)
    return cuts, masses


def ccb_cost(g, part, tau, weights):
    """Multiway balanced cost: (1/2) * sum over blocks of
    boundary / (2**(tau/2) * block_mass**(tau/2))."""
    if not 0.0 < tau <= 2.0:
        raise DomainError(f"tau must lie in (0, 2], got {tau}")
    _check_len(g, part)
    cuts, masses = _block_cuts_and_masses(g, part, weights.pi)
    if (masses <= 0).any():
        raise PartitionError("block with nonpositive balance mass")
    return float(0.5 * np.sum(cuts / (2.0 ** (tau / 2.0) * masses ** (tau / 2.0))))


def ccb_cost_quadratic(g, part, tau, weights):
    """Same value as ccb_cost, evaluated through Laplacian quadratic forms
    on indicator columns (exists to cross-check the two formulations)."""
    if not 0.0 < tau <= 2.0:
        raise DomainError(f"tau must lie in (0, 2], got {tau}")
    _check_len(g, part)
    X = np.zeros((g.n, part.k))
    X[np.arange(g.n), part.labels] = 1.0
    LX = laplacian_apply(g, X)
    numer = np.einsum("nk,nk->k", X, LX)
    masses = np.einsum("nk,n,nk->k", X, weights.pi, X)
    if (masses <= 0).any():
        raise PartitionError("block with nonpositive balance mass")
    return float(0.5 * np.sum(numer / (2.0 ** (tau / 2.0) * masses ** (tau / 2.0))))


def bh_cost(g, part, p, weights):
    """2-way cut normalized by bh_balance of the first block's share of
    size (ratio mode) or volume (normalized mode)."""
    if part.k != 2:
        raise PartitionError(f"bh_cost needs k=2, got k={part.k}")
    _check_len(g, part)
    cut = cut_cost(g, part)
    mass1 = float(weights.pi[part.labels == 0].sum())
    return cut / bh_balance(mass1 / weights.total, p)


def _check_len(g, part):
    if part.n != g.n:
        raise DimensionMismatchError(
            f"partition has {part.n} labels for a graph with {g.n} vertices")


# ---------------------------------------------------------------------------
# cost kinds and the brute-force oracle


@dataclass(frozen=True)
class CostKind:
    """Tagged cut-cost selector used by sweeps, the brute-force oracle, and
    threshold splitting."""

    family: str  # 'cut' | 'ccb' | 'bh'
    tau: float | None = None
    p: float | None = None
    mode: str = RATIO

    @classmethod
    def cut(cls):
        return cls(family="cut")

    @classmethod
    def ccb(cls, tau, mode):
        if not 0.0 < tau <= 2.0:
            raise DomainError(f"tau must lie in (0, 2], got {tau}")
        return cls(family="ccb", tau=float(tau), mode=mode.lower())

    @classmethod
    def bh(cls, p, mode):
        if not p > 1.0:
            raise DomainError(f"p must exceed 1, got {p}")
        return cls(family="bh", p=float(p), mode=mode.lower())

    def evaluate(self, g, part, weights=None):
        if self.family == "cut":
            return cut_cost(g, part)
        if weights is None:
            weights = balance_weights(g, self.mode)
        if self.family == "ccb":
            return ccb_cost(g, part, self.tau, weights)
        if self.family == "bh":
            return bh_cost(g, part, self.p, weights)
        raise DomainError(f"unknown cost family {self.family!r}")


def _partitions_into(n, k):
    """Yield canonical labelings (restricted growth strings) of n items
    into exactly k blocks, in lexicographic order."""
    labels = [0] * n

    def rec(pos, used):
        if pos == n:
            if used == k:
                yield tuple(labels)
            return
        # pruning: remaining positions must be able to open the missing blocks
        if used + (n - pos) < k:
            return
        for lab in range(min(used + 1, k)):
            labels[pos] = lab
            yield from rec(pos + 1, used + (1 if lab == used else 0))

    yield from rec(0, 0)


def brute_force_min(g, kind, k):
    """Global minimizer of ``kind`` over all partitions of g into k
    nonempty blocks. Ties go to the lexicographically smallest canonical
    labeling. Guarded by k**n <= 1e7."""
    if k < 1 or k > g.n:
        raise DomainError(f"k must lie in [1, {g.n}], got {k}")
    if k ** g.n > BRUTE_FORCE_GUARD:
        raise EnumerationLimitError(
            f"k**n = {k}**{g.n} exceeds the enumeration guard {BRUTE_FORCE_GUARD:g}")
    weights = None
    if kind.family in ("ccb", "bh"):
        weights = balance_weights(g, kind.mode)
    best_cost = None
    best_labels = None
    for labels in _partitions_into(g.n, k):
        part = PartitionK(np.asarray(labels), k)
        cost = kind.evaluate(g, part, weights)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_labels = labels
    return PartitionK(np.asarray(best_labels), k), float(best_cost)


# ---------------------------------------------------------------------------
# the two-triangle toy graph and bifurcation sweeps


def toy_graph(alpha):
    """Seven-vertex, nine-edge instance with one weakly attached vertex.

    Two unit-weight triangles {0,1,2} and {3,4,5} joined by the unit bridge
    (2,3); vertex 6 hangs off vertices 0 and 3 through two edges of weight
    alpha/2, so its degree is exactly alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    half = alpha / 2.0
    return build_graph(7, [
        (0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
        (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0),
        (2, 3, 1.0),
        (0, 6, half), (3, 6, half),
    ])


TOY_SINGLETON = (0, 0, 0, 0, 0, 0, 1)
# Two cost-tied 4|3 variants: the weak vertex can sit on either side of the
# bridge without changing the crossing weight or the mass pair.
TOY_BALANCED = ((0, 0, 0, 1, 1, 1, 0), (0, 0, 0, 1, 1, 1, 1))


def classify_toy_partition(part):
    """'singleton' (weak vertex alone), 'balanced' (either 4|3 variant), or
    'other'."""
    canon = tuple(canonical_labels(part.labels))
    if canon == TOY_SINGLETON:
        return "singleton"
    if canon in TOY_BALANCED:
        return "balanced"
    return "other"


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    param: float
    argmin_class: str
    cost_singleton: float
    cost_balanced: float
    cost_best: float


def bifurcation_sweep(alphas, params, family, mode, k=2):
    """Brute-force argmin classification of toy_graph(alpha) over a
    parameter grid (tau for 'ccb', p for 'bh')."""
    alphas = list(alphas)
    params = list(params)
    if not alphas or not params:
        raise DomainError("sweep grids must be nonempty")
    if family not in ("ccb", "bh"):
        raise DomainError(f"sweep family must be 'ccb' or 'bh', got {family!r}")
    rows = []
    for alpha in alphas:
        g = toy_graph(alpha)
        weights = balance_weights(g, mode)
        singleton = PartitionK(np.asarray(TOY_SINGLETON), 2)
        balanced = PartitionK(np.asarray(TOY_BALANCED[0]), 2)
        for value in params:
            kind = CostKind.ccb(value, mode) if family == "ccb" else CostKind.bh(value, mode)
            best, best_cost = brute_force_min(g, kind, k)
            rows.append(SweepRow(
                alpha=float(alpha),
                param=float(value),
                argmin_class=classify_toy_partition(best),
                cost_singleton=kind.evaluate(g, singleton, weights),
                cost_balanced=kind.evaluate(g, balanced, weights),
                cost_best=best_cost,
            ))
    return rows


SWEEP_FIELDS = ("alpha", "tau_or_p", "argmin_class",
                "cost_singleton", "cost_balanced", "cost_best")


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_FIELDS)
        for r in rows:
            writer.writerow([f"{r.alpha:.12g}", f"{r.param:.12g}", r.argmin_class,
                             f"{r.cost_singleton:.17g}", f"{r.cost_balanced:.17g}",
                             f"{r.cost_best:.17g}"])
