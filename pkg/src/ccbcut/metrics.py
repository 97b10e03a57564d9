"""Region-based segmentation quality metrics.

All three metrics are computed from the contingency table between a
segmentation and a ground-truth partition: covering (size-weighted best
IoU), the Rand pair-agreement index averaged over ground truths, and the
variation of information (natural log by default).
"""

import csv
import os

import numpy as np

from ccbcut.errors import DimensionMismatchError, DomainError


def _labels_of(part):
    labels = getattr(part, "labels", part)
    return np.asarray(labels, dtype=np.int64)


def contingency_table(seg, gt):
    """Counts n[u, v] = |S_u intersect G_v| plus the two marginals."""
    s = _labels_of(seg)
    t = _labels_of(gt)
    if s.shape != t.shape:
        raise DimensionMismatchError(
            f"segmentations disagree on size: {s.shape} vs {t.shape}")
    ks = int(s.max()) + 1
    kt = int(t.max()) + 1
    counts = np.bincount(s * kt + t, minlength=ks * kt).reshape(ks, kt)
    return counts, counts.sum(axis=1), counts.sum(axis=0)


def covering(seg, gt):
    """Size-weighted best-IoU covering of the ground truth by the
    segmentation; 1 exactly when the partitions coincide."""
    counts, seg_sizes, gt_sizes = contingency_table(seg, gt)
    union = seg_sizes[:, None] + gt_sizes[None, :] - counts
    iou = np.where(counts > 0, counts / union, 0.0)
    n = counts.sum()
    return float((gt_sizes * iou.max(axis=0)).sum() / n)


def pri(seg, gts):
    """Mean pair-agreement fraction against one or more ground truths."""
    if not isinstance(gts, (list, tuple)):
        gts = [gts]
    if len(gts) == 0:
        raise DomainError("at least one ground truth is required")
    return float(np.mean([_rand_index(seg, gt) for gt in gts]))


def _rand_index(seg, gt):
    counts, seg_sizes, gt_sizes = contingency_table(seg, gt)
    n = counts.sum()
    pairs = n * (n - 1) / 2.0
    if pairs == 0:
        return 1.0
    both = (counts * (counts - 1) // 2).sum()
    in_seg = (seg_sizes * (seg_sizes - 1) // 2).sum()
    in_gt = (gt_sizes * (gt_sizes - 1) // 2).sum()
    neither = pairs + both - in_seg - in_gt
    return float((both + neither) / pairs)


def voi(seg, gt, base="e"):
    """Variation of information H(S) + H(G) - 2 I(S; G); zero exactly for
    identical partitions and symmetric in its arguments."""
    counts, seg_sizes, gt_sizes = contingency_table(seg, gt)
    n = counts.sum()
    log = np.log if base == "e" else np.log2
    if base not in ("e", "2"):
        raise DomainError(f"base must be 'e' or '2', got {base!r}")

    def entropy(sizes):
        p = sizes[sizes > 0] / n
        return float(-(p * log(p)).sum())

    p_uv = counts[counts > 0] / n
    p_u = (seg_sizes[:, None] * np.ones_like(counts))[counts > 0] / n
    p_v = (np.ones_like(counts) * gt_sizes[None, :])[counts > 0] / n
    mutual = float((p_uv * log(p_uv / (p_u * p_v))).sum())
    return max(0.0, entropy(seg_sizes) + entropy(gt_sizes) - 2.0 * mutual)


METRICS_FIELDS = ("image", "method", "tau", "k", "covering", "pri", "voi",
                  "degree_spread", "runtime_s")


def append_metrics_row(path, row):
    """Append one row to a metrics report CSV, writing the header first if
    the file is new. ``row`` maps METRICS_FIELDS names to values."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_FIELDS)
        if fresh:
            writer.writeheader()
        writer.writerow({key: row.get(key, "") for key in METRICS_FIELDS})
