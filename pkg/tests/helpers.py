"""Shared test fixtures: small instances and independent dense oracles.

The oracles here deliberately avoid the package's own fast paths: dense
Laplacians are assembled entry by entry, the elimination isometry is built
from an explicit nullspace basis with a matrix square root, and threshold
sweeps are re-evaluated from scratch per split.
"""

import numpy as np

from ccbcut.costs import PartitionK
from ccbcut.graph import build_graph


# ---------------------------------------------------------------------------
# instances


def p3():
    return build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])


def p4():
    return build_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])


def path_graph(n, w=1.0):
    return build_graph(n, (np.arange(n - 1), np.arange(1, n), np.full(n - 1, w)))


def triangle():
    return build_graph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


def barbell(bridge=0.05, size=4):
    """Two cliques of ``size`` vertices joined by one weak edge."""
    edges = []
    for i in range(size):
        for j in range(i + 1, size):
            edges.append((i, j, 1.0))
            edges.append((size + i, size + j, 1.0))
    edges.append((0, size, bridge))
    return build_graph(2 * size, edges)


def triangle_pair(bridge=0.1):
    """Two unit triangles joined by one weak edge."""
    return build_graph(6, [
        (0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
        (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0),
        (2, 3, bridge),
    ])


def three_cliques(bridge=0.05):
    """Three unit 4-cliques chained by two weak edges."""
    edges = []
    for block in range(3):
        base = 4 * block
        for i in range(4):
            for j in range(i + 1, 4):
                edges.append((base + i, base + j, 1.0))
    edges.append((3, 4, bridge))
    edges.append((7, 8, bridge))
    return build_graph(12, edges)


def random_connected_graph(rng, n, extra_p=0.3, wlo=0.2, whi=2.0):
    """Random spanning tree plus Bernoulli extra edges; always connected."""
    edges = {}
    perm = rng.permutation(n)
    for idx in range(1, n):
        a = int(perm[idx])
        b = int(perm[rng.integers(0, idx)])
        edges[(min(a, b), max(a, b))] = rng.uniform(wlo, whi)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_p:
                edges[(i, j)] = rng.uniform(wlo, whi)
    return build_graph(n, [(i, j, w) for (i, j), w in edges.items()])


def random_partition(rng, n, k):
    """Uniform random surjective labeling."""
    while True:
        labels = rng.integers(0, k, size=n)
        if np.unique(labels).size == k:
            return PartitionK(labels, k)


# ---------------------------------------------------------------------------
# dense oracles


def dense_adjacency(g):
    W = np.zeros((g.n, g.n))
    for i, j, w in g.edge_tuples():
        W[i, j] = w
        W[j, i] = w
    return W


def dense_laplacian(g, gamma=None):
    W = dense_adjacency(g)
    if gamma is not None:
        scale = np.zeros((g.n, g.n))
        for e, (i, j, _) in enumerate(g.edge_tuples()):
            scale[i, j] = gamma[e]
            scale[j, i] = gamma[e]
        W = W * scale
    return np.diag(W.sum(axis=1)) - W


def _inv_sqrtm(A):
    vals, vecs = np.linalg.eigh(A)
    return vecs @ np.diag(vals ** -0.5) @ vecs.T


def dense_elimination_isometry(pi):
    """Explicit n x (n-1) isometry whose range is the complement of
    q = sqrt(pi)/||sqrt(pi)||, built as M (M'M)^(-1/2) from the sparse
    nullspace basis."""
    pi = np.asarray(pi, dtype=np.float64)
    q = np.sqrt(pi) / np.linalg.norm(np.sqrt(pi))
    n = pi.size
    M = np.vstack([q[1:][None, :], -q[0] * np.eye(n - 1)])
    return q, M @ _inv_sqrtm(M.T @ M)


def dense_reduced_operator(g, pi, gamma=None):
    """Dense B' Pi^(-1/2) L Pi^(-1/2) B for oracle comparisons."""
    _, B = dense_elimination_isometry(pi)
    L = dense_laplacian(g, gamma)
    S = np.diag(pi ** -0.5) @ L @ np.diag(pi ** -0.5)
    return B.T @ S @ B


def principal_angle(A, B):
    """Largest principal angle (radians) between two column spaces."""
    from scipy.linalg import subspace_angles

    return float(subspace_angles(np.atleast_2d(A.T).T, np.atleast_2d(B.T).T).max())


# ---------------------------------------------------------------------------
# synthetic rasters


def stripe_image(height, width, colors, noise=2.0, seed=0, bounds=None):
    """Horizontal stripes of flat colors plus integer-rounded Gaussian
    noise; returns (uint8 image, ground-truth labels row-major)."""
    rng = np.random.default_rng(seed)
    k = len(colors)
    if bounds is None:
        bounds = [round(height * i / k) for i in range(1, k)]
    img = np.zeros((height, width, 3), dtype=np.float64)
    gt = np.zeros((height, width), dtype=np.int64)
    edges = [0] + list(bounds) + [height]
    for band in range(k):
        img[edges[band]:edges[band + 1]] = colors[band]
        gt[edges[band]:edges[band + 1]] = band
    img += rng.normal(0.0, noise, size=img.shape)
    return np.clip(np.round(img), 0, 255).astype(np.uint8), gt.ravel()
