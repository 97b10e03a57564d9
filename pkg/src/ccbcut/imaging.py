"""Image ingestion, Lab affinity graphs, and end-to-end segmentation.

Pixels become vertices (row-major); every pixel pair within a Euclidean
pixel radius gets an edge weighted by a Gaussian kernel on the squared
distance between their L*a*b* colors. The kernel scale defaults to the
median in-radius color distance estimated from a seeded sample.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ccbcut.costs import PartitionK
from ccbcut.errors import DomainError, FormatError
from ccbcut.graph import WEIGHT_FLOOR, balance_weights, build_graph, degree_vector, is_connected
from ccbcut.rounding import hierarchical_segment, multiway_segment

# sRGB -> XYZ (D65, 2-degree observer); white point = matrix row sums so the
# neutral axis maps exactly onto a=b=0.
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = _RGB_TO_XYZ.sum(axis=1)


def rgb_to_lab(image):
    """CIE L*a*b* values (L in [0, 100]) of an 8-bit sRGB raster (h, w, 3)."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError(f"expected an (h, w, 3) raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.integer) and arr.min() >= 0 and arr.max() <= 255:
            arr = arr.astype(np.uint8)
        else:
            raise FormatError(f"expected 8-bit channels, got dtype {arr.dtype}")
    srgb = arr.astype(np.float64) / 255.0
    linear = np.where(srgb <= 0.04045, srgb / 12.92,
                      ((srgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _RGB_TO_XYZ.T / _WHITE

    delta = 6.0 / 29.0
    f = np.where(xyz > delta ** 3, np.cbrt(xyz), xyz / (3 * delta ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


@dataclass
class AffinityParams:
    """Neighborhood radius (pixels), Gaussian scale sigma (None = tuned to
    the median in-radius Lab distance of a sample), and an optional weight
    cutoff applied only when the graph stays connected."""

    radius: float = 10.0
    sigma: float | None = None
    min_weight: float = 0.0
    sample_pairs: int = 10000
    sample_seed: int = 0
    max_edges: float = 3e7

    def __post_init__(self):
        if self.radius < 1.0:
            raise DomainError(f"radius must be >= 1 pixel, got {self.radius}")
        if self.sigma is not None and self.sigma <= 0:
            raise DomainError("sigma must be positive")
        if self.min_weight < 0:
            raise DomainError("min_weight must be nonnegative")


def _neighbor_offsets(radius):
    """Half-plane offsets (dy, dx) with dy*dy + dx*dx <= radius**2; taking
    only dy > 0 or (dy == 0, dx > 0) yields each pair once with canonical
    vertex order."""
    rmax = int(np.floor(radius))
    offsets = []
    for dy in range(rmax + 1):
        dx_lo = 1 if dy == 0 else -rmax
        for dx in range(dx_lo, rmax + 1):
            if dy == 0 and dx <= 0:
                continue
            if dy * dy + dx * dx <= radius * radius:
                offsets.append((dy, dx))
    return offsets


def lab_affinity(image, params=None):
    """Affinity graph over pixels: edges within ``params.radius``, weights
    exp(-||lab_i - lab_j||^2 / (2 sigma^2)), floored at the graph weight
    floor so extreme contrasts cannot underflow to invalid zeros."""
    params = params or AffinityParams()
    lab = rgb_to_lab(image)
    h, w = lab.shape[:2]
    n = h * w
    offsets = _neighbor_offsets(params.radius)
    if n * len(offsets) > params.max_edges:
        raise DomainError(
            f"affinity graph would need about {n * len(offsets):.2g} edges, "
            f"over the budget {params.max_edges:.2g}; reduce radius or image size")

    rows, cols, sqdists = [], [], []
    for dy, dx in offsets:
        ys = np.arange(h - dy)
        xs = np.arange(max(0, -dx), w - max(0, dx))
        if ys.size == 0 or xs.size == 0:
            continue
        base = (ys[:, None] * w + xs[None, :]).ravel()
        other = ((ys + dy)[:, None] * w + (xs + dx)[None, :]).ravel()
        d = (lab[ys[:, None], xs[None, :], :]
             - lab[(ys + dy)[:, None], (xs + dx)[None, :], :])
        sqdists.append(np.einsum("yxc,yxc->yx", d, d).ravel())
        rows.append(base)
        cols.append(other)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    sqdists = np.concatenate(sqdists)

    sigma = params.sigma
    if sigma is None:
        sigma = _tuned_sigma(sqdists, params.sample_pairs, params.sample_seed)
    weights = np.exp(-sqdists / (2.0 * sigma * sigma))
    weights = np.maximum(weights, WEIGHT_FLOOR)

    g = build_graph(n, (rows, cols, weights))
    if params.min_weight > 0.0:
        keep = weights >= params.min_weight
        if keep.sum() < weights.size:
            pruned = build_graph(n, (rows[keep], cols[keep], weights[keep]))
            if is_connected(pruned):
                return pruned
            warnings.warn("weight cutoff would disconnect the graph; keeping "
                          "all edges", RuntimeWarning, stacklevel=2)
    return g


def _tuned_sigma(sqdists, sample_pairs, seed):
    if sqdists.size > sample_pairs:
        rng = np.random.default_rng(seed)
        sample = rng.choice(sqdists, size=sample_pairs, replace=False)
    else:
        sample = sqdists
    median = float(np.median(np.sqrt(sample)))
    return median if median > 1e-8 else 1.0


@dataclass
class LabelMap:
    """Row-major per-pixel block labels for a width x height raster."""

    width: int
    height: int
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if labels.size != self.width * self.height:
            raise DomainError(
                f"label count {labels.size} != width*height = {self.width * self.height}")
        self.labels = labels

    @property
    def k(self):
        return int(self.labels.max()) + 1

    def grid(self):
        return self.labels.reshape(self.height, self.width)

    def partition(self):
        return PartitionK(self.labels, self.k)


def segment_image(image, params, cfg, method="multiway", mode="normalized",
                  seed=0):
    """Full pipeline: Lab affinity graph, embedding, rounding, label map."""
    arr = np.asarray(image)
    h, w = arr.shape[0], arr.shape[1]
    if cfg.k == 1:
        return LabelMap(width=w, height=h, labels=np.zeros(h * w, dtype=np.int64))
    g = lab_affinity(image, params)
    weights = balance_weights(g, mode)
    if method == "multiway":
        part = multiway_segment(g, cfg, weights, seed=seed)
    elif method == "hierarchical":
        part = hierarchical_segment(g, cfg, weights, seed=seed)
    else:
        raise DomainError(f"method must be 'multiway' or 'hierarchical', got {method!r}")
    return LabelMap(width=w, height=h, labels=part.labels)


def degree_spread(g, part):
    """Population standard deviation of block volumes over their mean."""
    if isinstance(part, LabelMap):
        part = part.partition()
    volumes = np.bincount(part.labels, weights=degree_vector(g), minlength=part.k)
    return float(volumes.std() / volumes.mean())


# ---------------------------------------------------------------------------
# raster I/O

# fixed palette for colorized maps (20 well-separated colors, cycled)
PALETTE = np.array([
    [230, 25, 75], [60, 180, 75], [255, 225, 25], [0, 130, 200],
    [245, 130, 48], [145, 30, 180], [70, 240, 240], [240, 50, 230],
    [210, 245, 60], [250, 190, 212], [0, 128, 128], [220, 190, 255],
    [170, 110, 40], [255, 250, 200], [128, 0, 0], [170, 255, 195],
    [128, 128, 0], [255, 215, 180], [0, 0, 128], [128, 128, 128],
], dtype=np.uint8)


def read_image(path):
    """Load a PNG/PPM raster as an (h, w, 3) uint8 array."""
    from PIL import Image

    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_label_png(label_map, path):
    """Save the label map as 16-bit grayscale PNG."""
    from PIL import Image

    grid = label_map.grid()
    if grid.max() > np.iinfo(np.uint16).max:
        raise DomainError("more labels than a 16-bit map can hold")
    Image.fromarray(grid.astype(np.uint16)).save(path, format="PNG")


def read_label_png(path):
    from PIL import Image

    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.ndim != 2:
        raise FormatError(f"{path}: expected a single-channel label map")
    return LabelMap(width=arr.shape[1], height=arr.shape[0],
                    labels=arr.astype(np.int64).ravel())


def write_label_colorized(label_map, path):
    """Save a fixed-palette RGB rendering of the label map."""
    from PIL import Image

    rgb = PALETTE[label_map.grid() % PALETTE.shape[0]]
    Image.fromarray(rgb).save(path, format="PNG")
