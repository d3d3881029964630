"""1-D k-means over the merged matrix and connected segment extraction."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .frames import write_pgm
from .spectral import MergedMatrix

ADJACENCIES = ("four", "eight")
INITS = ("optimal", "quantile")


class DegenerateInput(ValueError):
    """Fewer distinct values than clusters."""


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    centroids: np.ndarray  # ascending
    labels: np.ndarray     # cluster id per flat index
    sizes: np.ndarray
    sse: float
    iterations: int = 0

    def label_grid(self, width: int, height: int) -> np.ndarray:
        return self.labels.reshape(height, width)


@dataclass(frozen=True, eq=False)
class Segment:
    id: int
    cluster_id: int
    xs: np.ndarray = field(repr=False)  # 1-based
    ys: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.xs.size)

    @property
    def pixels(self) -> set[tuple[int, int]]:
        return set(zip(self.xs.tolist(), self.ys.tolist()))

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (int(self.xs.min()), int(self.ys.min()), int(self.xs.max()), int(self.ys.max()))

    @property
    def centroid(self) -> tuple[float, float]:
        return (float(self.xs.mean()), float(self.ys.mean()))


def sse_of(values, labels, k) -> float:
    values = np.asarray(values, dtype=np.float64)
    total = 0.0
    for c in range(k):
        v = values[labels == c]
        if v.size:
            total += float(((v - v.mean()) ** 2).sum())
    return total


def _lloyd(uniq, counts, centroids, max_iters):
    """Weighted Lloyd iterations on distinct values.

    Returns (cluster per distinct value, centroids, iterations). Ties go to the
    lower centroid; an emptied cluster is reseeded at the value farthest from
    its assigned centroid.
    """
    k = centroids.size
    assign = None
    prev_sse = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        centroids = np.sort(centroids)
        mids = (centroids[:-1] + centroids[1:]) / 2
        new = np.searchsorted(mids, uniq, side="left")
        sizes = np.bincount(new, weights=counts, minlength=k)
        for c in np.flatnonzero(sizes == 0):
            far = int(np.argmax(np.abs(uniq - centroids[new])))
            new[far] = c
            sizes = np.bincount(new, weights=counts, minlength=k)
        sums = np.bincount(new, weights=counts * uniq, minlength=k)
        centroids = sums / sizes
        sse = float((counts * (uniq - centroids[new]) ** 2).sum())
        # objective must not increase between iterations
        assert sse <= prev_sse * (1 + 1e-12) + 1e-300, (sse, prev_sse)
        prev_sse = sse
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
    order = np.argsort(centroids, kind="stable")
    rank = np.empty(k, dtype=np.int64)
    rank[order] = np.arange(k)
    return rank[assign], centroids[order], it


def kmeans_1d(values, k: int, max_iters: int = 300, init: str = "optimal") -> ClusterAssignment:
    """Deterministic 1-D k-means.

    ``init="optimal"`` seeds Lloyd with the exact minimum-SSE partition found
    by dynamic programming over the sorted distinct values (the optimum is
    already a Lloyd fixed point). ``init="quantile"`` seeds centroids at the
    ``(2i - 1) / 2k`` quantiles instead and may stop at a local optimum.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}")
    x = np.asarray(getattr(values, "values", values), dtype=np.float64).ravel()
    if x.size < k:
        raise DegenerateInput(f"{x.size} values cannot form {k} clusters")
    uniq, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    if uniq.size < k:
        raise DegenerateInput(f"degenerate input: {uniq.size} distinct values for k={k}")
    w = counts.astype(np.float64)
    if init == "optimal":
        starts = _kernels.kmeans_dp(uniq, w, k)
        ids = np.zeros(uniq.size, dtype=np.int64)
        ids[starts[1:]] = 1
        ids = np.cumsum(ids)
        centroids = np.bincount(ids, weights=w * uniq, minlength=k) / np.bincount(ids, weights=w, minlength=k)
    else:
        centroids = np.quantile(x, (2 * np.arange(1, k + 1) - 1) / (2 * k))
    per_uniq, centroids, iters = _lloyd(uniq, w, centroids, max_iters)
    labels = per_uniq[inverse].ravel()
    sizes = np.bincount(labels, minlength=k)
    return ClusterAssignment(k, centroids, labels, sizes, sse_of(x, labels, k), iters)


def exclude_largest(assign: ClusterAssignment) -> set[int]:
    """Every cluster except the biggest; on a size tie the higher centroid goes."""
    sizes = np.asarray(assign.sizes)
    top = np.flatnonzero(sizes == sizes.max())
    drop = max(top, key=lambda c: (assign.centroids[c], c))
    return {c for c in range(len(sizes)) if c != drop}


def connected_segments(labels: np.ndarray, retained, adjacency: str = "four") -> list[Segment]:
    """Maximal same-cluster connected pixel sets within the retained clusters.

    ``labels`` is the ``(height, width)`` cluster grid. Segments are ordered by
    the top-left of their bounding box ``(min_y, min_x)``, then cluster id,
    then first pixel in raster order; ids follow that order.
    """
    if adjacency not in ADJACENCIES:
        raise ValueError(f"adjacency must be one of {ADJACENCIES}")
    labels = np.asarray(labels)
    keep = np.isin(labels, np.fromiter(retained, dtype=np.int64, count=len(retained)))
    masked = np.where(keep, labels, -1).astype(np.int32)
    comp, n = _kernels.label_components(masked, adjacency == "eight")
    if n == 0:
        return []
    h, w = labels.shape
    flat = comp.ravel()
    pix = np.flatnonzero(flat >= 0)
    cid = flat[pix]
    order = np.argsort(cid, kind="stable")
    pix, cid = pix[order], cid[order]
    counts = np.bincount(cid, minlength=n)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    ys = pix // w + 1
    xs = pix % w + 1
    min_x = np.minimum.reduceat(xs, starts)
    min_y = np.minimum.reduceat(ys, starts)
    first = pix[starts]
    clusters = labels.ravel()[first]
    rank = np.lexsort((first, clusters, min_x, min_y))
    segs = []
    for new_id, c in enumerate(rank):
        s, e = starts[c], starts[c] + counts[c]
        segs.append(Segment(new_id, int(clusters[c]), xs[s:e], ys[s:e]))
    return segs


@dataclass
class Segmentation:
    sa: list[Segment]
    sb: list[Segment]
    assign3: ClusterAssignment | None = None
    assign4: ClusterAssignment | None = None

    @property
    def no_signal(self) -> bool:
        return self.assign3 is None


def segment_matrix(matrix: MergedMatrix, adjacency: str = "four",
                   init: str = "optimal") -> Segmentation:
    if matrix.no_signal:
        return Segmentation([], [])
    try:
        a3 = kmeans_1d(matrix.values, 3, init=init)
        a4 = kmeans_1d(matrix.values, 4, init=init)
    except DegenerateInput:
        return Segmentation([], [])
    h, w = matrix.values.shape
    sa = connected_segments(a3.label_grid(w, h), exclude_largest(a3), adjacency)
    sb = connected_segments(a4.label_grid(w, h), exclude_largest(a4), adjacency)
    return Segmentation(sa, sb, a3, a4)


def extract_sa_sb(matrix: MergedMatrix, adjacency: str = "four",
                  init: str = "optimal") -> tuple[list[Segment], list[Segment]]:
    seg = segment_matrix(matrix, adjacency, init)
    return seg.sa, seg.sb


def dump_segment_map(seg: Segmentation, width: int, height: int, path) -> None:
    """3-means cluster shades: excluded water cluster white, retained clusters grey."""
    img = np.full((height, width), 255, dtype=np.uint8)
    if seg.assign3 is not None:
        grid = seg.assign3.label_grid(width, height)
        retained = sorted(exclude_largest(seg.assign3))
        for i, c in enumerate(retained):
            img[grid == c] = 96 + 64 * i
    write_pgm(path, img)


def dump_segment_csv(segments, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["id", "cluster", "pixel_count", "min_x", "min_y", "max_x", "max_y"])
        for s in segments:
            wr.writerow([s.id, s.cluster_id, s.size, *s.bbox])
