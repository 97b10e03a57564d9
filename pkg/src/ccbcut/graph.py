"""Sparse weighted undirected graphs: construction, degrees, Laplacian.

Graphs are stored as a canonical edge list (endpoints ``rows < cols``,
sorted lexicographically) plus a CSR-style adjacency index for per-vertex
neighbor iteration. Instances are immutable after construction and safe to
share across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from ccbcut import kernels
from ccbcut.errors import (
    DimensionMismatchError,
    DuplicateEdgeError,
    FormatError,
    NonpositiveWeightError,
    SelfLoopError,
    VertexIndexError,
    ZeroDegreeError,
)

# Weights below this are rejected: they would produce ill-conditioned degrees.
WEIGHT_FLOOR = 1e-12

RATIO = "ratio"
NORMALIZED = "normalized"


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with canonical edge arrays.

    Attributes
    ----------
    n : int
        Vertex count.
    rows, cols : int64 arrays, shape (m,)
        Edge endpoints with rows[e] < cols[e], lexicographically sorted.
    weights : float64 array, shape (m,)
        Strictly positive edge weights.
    adj_indptr, adj_targets, adj_weights, adj_edge : arrays
        CSR adjacency over the symmetrized edge set; ``adj_edge`` maps each
        adjacency slot back to its edge index.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray = field(repr=False)
    adj_indptr: np.ndarray = field(repr=False)
    adj_targets: np.ndarray = field(repr=False)
    adj_weights: np.ndarray = field(repr=False)
    adj_edge: np.ndarray = field(repr=False)

    @property
    def num_edges(self):
        return int(self.rows.shape[0])

    def neighbors(self, v):
        """Return (targets, weights) arrays for vertex ``v``."""
        lo, hi = self.adj_indptr[v], self.adj_indptr[v + 1]
        return self.adj_targets[lo:hi], self.adj_weights[lo:hi]

    def edge_tuples(self):
        """Iterate edges as (i, j, w) with i < j in canonical order."""
        for i, j, w in zip(self.rows, self.cols, self.weights):
            yield int(i), int(j), float(w)


def _freeze(a):
    a.setflags(write=False)
    return a


def build_graph(n, edges):
    """Build a graph from ``edges``, an iterable of (i, j, w) triples or a
    triple of arrays (rows, cols, weights).

    Edges are canonicalized to i < j and sorted; self-loops, duplicate
    pairs, out-of-range indices, and weights below 1e-12 are each rejected
    with a distinct error.
    """
    if n < 1:
        raise VertexIndexError(f"vertex count must be >= 1, got {n}")
    if isinstance(edges, tuple) and len(edges) == 3:
        raw_i = np.asarray(edges[0])
        raw_j = np.asarray(edges[1])
        w = np.asarray(edges[2], dtype=np.float64)
    else:
        edges = list(edges)
        if edges:
            raw_i = np.asarray([e[0] for e in edges])
            raw_j = np.asarray([e[1] for e in edges])
            w = np.asarray([e[2] for e in edges], dtype=np.float64)
        else:
            raw_i = np.empty(0, dtype=np.int64)
            raw_j = np.empty(0, dtype=np.int64)
            w = np.empty(0, dtype=np.float64)
    if not (np.issubdtype(raw_i.dtype, np.integer) and np.issubdtype(raw_j.dtype, np.integer)):
        raise VertexIndexError("edge endpoints must be integers")
    raw_i = raw_i.astype(np.int64)
    raw_j = raw_j.astype(np.int64)
    if raw_i.shape != raw_j.shape or raw_i.shape != w.shape:
        raise DimensionMismatchError("edge arrays must have equal length")

    bad = (raw_i < 0) | (raw_i >= n) | (raw_j < 0) | (raw_j >= n)
    if bad.any():
        e = int(np.flatnonzero(bad)[0])
        raise VertexIndexError(
            f"edge ({raw_i[e]}, {raw_j[e]}) out of range for n={n}")
    loops = raw_i == raw_j
    if loops.any():
        raise SelfLoopError(f"self-loop at vertex {int(raw_i[np.flatnonzero(loops)[0]])}")
    if (~np.isfinite(w)).any() or (w < WEIGHT_FLOOR).any():
        e = int(np.flatnonzero(~np.isfinite(w) | (w < WEIGHT_FLOOR))[0])
        raise NonpositiveWeightError(
            f"edge ({raw_i[e]}, {raw_j[e]}) has weight {w[e]!r} "
            f"(must be >= {WEIGHT_FLOOR})")

    rows = np.minimum(raw_i, raw_j)
    cols = np.maximum(raw_i, raw_j)
    order = np.lexsort((cols, rows))
    rows, cols, w = rows[order], cols[order], w[order]
    if rows.size > 1:
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if dup.any():
            e = int(np.flatnonzero(dup)[0])
            raise DuplicateEdgeError(f"duplicate edge ({rows[e]}, {cols[e]})")

    m = rows.shape[0]
    ends = np.concatenate([rows, cols])
    others = np.concatenate([cols, rows])
    eids = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
    adj_order = np.argsort(ends, kind="stable")
    counts = np.bincount(ends, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    wsym = np.concatenate([w, w])
    return Graph(
        n=int(n),
        rows=_freeze(rows),
        cols=_freeze(cols),
        weights=_freeze(w),
        degrees=_freeze(kernels.accumulate_degrees(rows, cols, w, n)),
        adj_indptr=_freeze(indptr),
        adj_targets=_freeze(others[adj_order]),
        adj_weights=_freeze(wsym[adj_order]),
        adj_edge=_freeze(eids[adj_order]),
    )


def degree_vector(g):
    """Per-vertex degree d_j = sum of incident edge weights."""
    return g.degrees


def laplacian_apply(g, x):
    """Apply L = D - W to a vector or column-wise to a matrix, in O(|E|)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.n:
        raise DimensionMismatchError(f"expected leading dimension {g.n}, got {x.shape[0]}")
    return kernels.laplacian_matvec(g.rows, g.cols, g.weights, g.degrees, x)


@dataclass(frozen=True)
class BalanceWeights:
    """Per-vertex positive weights steering the cut normalization.

    ``ratio`` mode weighs vertices equally (block mass = block size);
    ``normalized`` mode uses degrees (block mass = block volume).
    """

    mode: str
    pi: np.ndarray

    @property
    def total(self):
        return float(self.pi.sum())


def balance_weights(g, mode):
    """Build BalanceWeights for ``mode`` in {'ratio', 'normalized'}."""
    mode = mode.lower()
    if mode == RATIO:
        pi = np.ones(g.n)
    elif mode == NORMALIZED:
        pi = degree_vector(g)
        if (pi <= 0).any():
            v = int(np.flatnonzero(pi <= 0)[0])
            raise ZeroDegreeError(f"vertex {v} has zero degree in normalized mode")
    else:
        raise ValueError(f"unknown balance mode {mode!r}")
    return BalanceWeights(mode=mode, pi=_freeze(pi))


def is_connected(g):
    """BFS connectivity check."""
    if g.n == 1:
        return True
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        v = stack.pop()
        targets, _ = g.neighbors(v)
        for t in targets:
            if not seen[t]:
                seen[t] = True
                count += 1
                stack.append(int(t))
    return count == g.n


def connected_components(g):
    """Label vertices by connected component; returns (count, labels)."""
    labels = np.full(g.n, -1, dtype=np.int64)
    comp = 0
    for start in range(g.n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            v = stack.pop()
            targets, _ = g.neighbors(v)
            for t in targets:
                if labels[t] < 0:
                    labels[t] = comp
                    stack.append(int(t))
        comp += 1
    return comp, labels


def induced_subgraph(g, vertices):
    """Subgraph on ``vertices`` (sorted unique indices); returns
    (subgraph, vertex_index_array) where vertex_index_array[local] = global."""
    vertices = np.asarray(sorted(set(int(v) for v in vertices)), dtype=np.int64)
    if vertices.size == 0:
        raise VertexIndexError("empty vertex set")
    if vertices[0] < 0 or vertices[-1] >= g.n:
        raise VertexIndexError("subgraph vertex out of range")
    local = np.full(g.n, -1, dtype=np.int64)
    local[vertices] = np.arange(vertices.size)
    keep = (local[g.rows] >= 0) & (local[g.cols] >= 0)
    sub = build_graph(
        vertices.size,
        (local[g.rows[keep]], local[g.cols[keep]], g.weights[keep]),
    )
    return sub, vertices


def write_edgelist(g, path):
    """Write the textual edge-list format: header ``n m``, then ``i j w``
    lines in canonical order."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.num_edges}\n")
        for i, j, w in g.edge_tuples():
            fh.write(f"{i} {j} {w:.17g}\n")


def read_edgelist(path):
    """Read the textual edge-list format (edges may appear in any order)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty edge-list file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"{path}: header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise FormatError(f"{path}: header promises {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: bad edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise FormatError(f"{path}: bad edge line {ln!r}") from exc
    return build_graph(n, edges)
