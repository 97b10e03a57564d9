"""Rounding embeddings to discrete partitions.

Two routes: k-means on embedding rows for simultaneous k-way partitions,
and recursive 2-way threshold splits, where each region is re-embedded
with one column and swept for the threshold minimizing the 2-way balanced
cost. Both are deterministic under a fixed seed.
"""

import warnings
from dataclasses import dataclass, replace

import numpy as np

from ccbcut.costs import CostKind, PartitionK, bh_balance, ccb_cost
from ccbcut.errors import ConstantVectorError, DomainError
from ccbcut.graph import balance_weights, connected_components, induced_subgraph
from ccbcut.irrq import _kmeans_labels, irrq_solve


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    seed: int

    def partition(self, k=None):
        return PartitionK(self.labels, k if k is not None else self.centers.shape[0])


def kmeans(points, k, seed=0, restarts=10, max_iter=300):
    """Best-of-``restarts`` k-means with k-means++ seeding; deterministic
    for a fixed seed. Empty clusters never occur (the solver reseeds them
    from the farthest points)."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64).T).T
    if k > points.shape[0]:
        raise DomainError(f"k={k} exceeds the number of points {points.shape[0]}")
    labels, centers, inertia = _kmeans_labels(points, k, seed, restarts, max_iter)
    return KMeansResult(labels=labels, centers=centers, inertia=inertia, seed=seed)


def _unit_rows(Y):
    norms = np.linalg.norm(Y, axis=1, keepdims=True)
    return np.where(norms > 1e-12, Y / np.maximum(norms, 1e-12), 0.0)


def multiway_segment(g, cfg, weights, seed=0):
    """Embed with the reweighted spectral solver, then k-means the rows.

    Several standard views of the rows are clustered: the raw rows, their
    unit-normalized variant, the leading k-1 columns (the convention that
    implicitly keeps the constant vector), and each single column. The
    candidate partition with the lowest balanced-cut cost is returned; raw
    rows tend to win once the embedding has collapsed to near-indicator
    structure, the other views on smooth spectral embeddings.
    """
    result = irrq_solve(g, cfg, weights, seed=seed)
    Y = result.embedding
    views = [Y, _unit_rows(Y)]
    if cfg.k >= 2:
        views.append(Y[:, : cfg.k - 1])
    views.extend(Y[:, j:j + 1] for j in range(1, Y.shape[1]))
    best = None
    for view in views:
        if np.ptp(view) == 0.0:
            continue  # a constant view cannot hold k clusters
        km = kmeans(view, cfg.k, seed=seed)
        part = PartitionK(km.labels, cfg.k)
        cost = ccb_cost(g, part, cfg.tau, weights)
        if best is None or cost < best[0]:
            best = (cost, part)
    return best[1]


# ---------------------------------------------------------------------------
# threshold splitting


@dataclass
class SplitCandidate:
    """One 2-way split of a region: the boolean mask of the first side (in
    region-local indexing), the value threshold between the sides, the
    embedding column position of the split, and the resulting 2-way cost."""

    region: int
    position: int
    threshold: float
    cost: float
    mask: np.ndarray


def _two_way_costs(kind, cut, mass_a, mass_b):
    """Vectorized 2-way cost of ``kind`` over sweep positions."""
    if kind.family == "cut":
        return cut
    if kind.family == "ccb":
        scale = 2.0 ** (kind.tau / 2.0)
        return 0.5 * cut * (mass_a ** (-kind.tau / 2.0)
                            + mass_b ** (-kind.tau / 2.0)) / scale
    if kind.family == "bh":
        total = mass_a + mass_b
        phi = np.asarray([bh_balance(f, kind.p) for f in mass_a / total])
        return cut / phi
    raise DomainError(f"unknown cost family {kind.family!r}")


def best_threshold_split(g, values, kind, weights=None, region=0):
    """Cheapest of the n-1 order-statistic splits of ``values``.

    Vertices are sorted by value (stable); position s puts the s smallest
    on the first side. The crossing weight is accumulated incrementally
    over edges, so the whole sweep costs O(|E| + n log n). Cost ties go to
    the smaller first side.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (g.n,):
        raise DomainError(f"values must have shape ({g.n},)")
    if values.max() - values.min() == 0.0:
        raise ConstantVectorError("cannot threshold an all-equal value vector")
    if weights is None and kind.family != "cut":
        weights = balance_weights(g, kind.mode)
    pi = weights.pi if weights is not None else np.ones(g.n)

    order = np.argsort(values, kind="stable")
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n)

    # edge (i,j) crosses exactly the splits s with min(rank)+1 <= s <= max(rank)
    lo = np.minimum(rank[g.rows], rank[g.cols])
    hi = np.maximum(rank[g.rows], rank[g.cols])
    diff = np.zeros(g.n + 1)
    np.add.at(diff, lo + 1, g.weights)
    np.add.at(diff, hi + 1, -g.weights)
    cut = np.cumsum(diff)[1:g.n]  # cut[s-1] for s = 1..n-1

    mass_sorted = np.cumsum(pi[order])
    mass_a = mass_sorted[: g.n - 1]
    mass_b = mass_sorted[-1] - mass_a

    costs = _two_way_costs(kind, cut, mass_a, mass_b)
    best = int(np.argmin(costs))  # argmin returns the first (smallest side) tie
    s = best + 1
    mask = np.zeros(g.n, dtype=bool)
    mask[order[:s]] = True
    threshold = 0.5 * (values[order[s - 1]] + values[order[s]])
    return SplitCandidate(region=region, position=s, threshold=float(threshold),
                          cost=float(costs[best]), mask=mask)


def _region_candidate(g, cfg, weights, verts, rid, seed):
    """Best 2-way split of one region, embedded as a self-contained
    instance with the subgraph's own balance weights."""
    sub, verts = induced_subgraph(g, verts)
    ncomp, comp_labels = connected_components(sub)
    if ncomp > 1:
        # a zero-cut split along the smallest component is globally optimal
        sizes = np.bincount(comp_labels)
        smallest = int(np.argmin(sizes))
        mask = comp_labels == smallest
        return SplitCandidate(region=rid, position=int(mask.sum()),
                              threshold=float("nan"), cost=0.0, mask=mask)
    sub_weights = balance_weights(sub, weights.mode)
    sub_cfg = replace(cfg, k=1)
    res = irrq_solve(sub, sub_cfg, sub_weights, seed=seed)
    kind = CostKind.ccb(cfg.tau, weights.mode)
    return best_threshold_split(sub, res.embedding[:, 0], kind, sub_weights,
                                region=rid)


def hierarchical_segment(g, cfg, weights, seed=0, order="cost", on_split=None):
    """Recursive 2-way partitioning into cfg.k blocks.

    At each of the k-1 steps, every current region of size >= 2 proposes
    its best threshold split; the executed split is the cheapest one
    (``order='cost'``) or the one from the largest region
    (``order='size'``). Unsplittable regions are skipped; if every region
    is a singleton the loop stops early with a diagnostic.
    """
    if cfg.k < 2:
        raise DomainError(f"hierarchical splitting needs k >= 2, got {cfg.k}")
    if order not in ("cost", "size"):
        raise DomainError(f"order must be 'cost' or 'size', got {order!r}")
    labels = np.zeros(g.n, dtype=np.int64)
    regions = {0: np.arange(g.n, dtype=np.int64)}
    next_label = 1
    while next_label < cfg.k:
        candidates = []
        for rid in sorted(regions):
            verts = regions[rid]
            if verts.size < 2:
                continue
            candidates.append(_region_candidate(g, cfg, weights, verts, rid, seed))
        if not candidates:
            warnings.warn(
                f"all regions are singletons after {next_label} blocks; "
                f"stopping below k={cfg.k}", RuntimeWarning, stacklevel=2)
            break
        if order == "cost":
            chosen = min(candidates, key=lambda c: (c.cost, c.region))
        else:
            chosen = max(candidates, key=lambda c: (regions[c.region].size, -c.region))
        verts = regions[chosen.region]
        side_a = verts[chosen.mask]
        side_b = verts[~chosen.mask]
        labels[side_b] = next_label
        regions[chosen.region] = side_a
        regions[next_label] = side_b
        if on_split is not None:
            on_split(chosen, side_a, side_b)
        next_label += 1
    return PartitionK(labels, next_label)
