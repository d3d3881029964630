"""Per-segment variables, nearest-partner pairing and positive labelling.

Variable names follow the original numbering: V2-V7 describe a segment from
the 3-means set, V8-V13 its nearest partner from the 4-means set, and the six
``Va_b`` names are ratios of the two.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import _kernels
from .segmentation import Segment
from .spectral import MergedMatrix

OWN = ("V2", "V3", "V4", "V5", "V6", "V7")
PARTNER = ("V8", "V9", "V10", "V11", "V12", "V13")
RATIOS = ("V2_8", "V3_9", "V4_10", "V5_11", "V6_12", "V7_13")
VARIABLES = OWN + PARTNER + RATIOS
STD_CONVENTIONS = ("population", "sample")

# zero-denominator ratio; lands in the top bin under any cutoffs
RATIO_SENTINEL = math.inf


class PairingError(ValueError):
    """No 4-means segment to pair with."""


@dataclass
class FeatureVector:
    segment_id: int
    nearest_sb_id: int
    v2: float
    v3: float
    v4: float
    v5: float
    v6: float
    v7: float
    v8: float
    v9: float
    v10: float
    v11: float
    v12: float
    v13: float
    r2_8: float
    r3_9: float
    r4_10: float
    r5_11: float
    r6_12: float
    r7_13: float
    v1: int | None = None

    def values(self) -> np.ndarray:
        """The 18 variables in ``VARIABLES`` order."""
        return np.array([getattr(self, a) for a in _ATTRS])

    def get(self, name: str) -> float:
        return getattr(self, _ATTR_OF[name])

    def as_dict(self) -> dict[str, float]:
        return {n: self.get(n) for n in VARIABLES}


_ATTRS = [f.name for f in fields(FeatureVector)][2:20]
_ATTR_OF = dict(zip(VARIABLES, _ATTRS))


def feature_matrix(fvs) -> np.ndarray:
    if not fvs:
        return np.zeros((0, len(VARIABLES)))
    return np.array([fv.values() for fv in fvs], dtype=np.float64)


# -- geometry ----------------------------------------------------------------

def round_half_up(v):
    return np.floor(np.asarray(v, dtype=np.float64) + 0.5).astype(np.int64)


def five_points(seg: Segment) -> list[tuple[int, int]]:
    """Bounding-box corners plus the rounded centroid, as 1-based (x, y)."""
    x0, y0, x1, y1 = seg.bbox
    cx, cy = seg.centroid
    centre = (int(round_half_up(cx)), int(round_half_up(cy)))
    return [(x0, y0), (x0, y1), (x1, y0), (x1, y1), centre]


_PAIRS = np.array([(i, j) for i in range(5) for j in range(i + 1, 5)])


def _std(vals, convention):
    """Std over the last axis (length 5) from pairwise differences.

    Equal values give exactly 0, with no mean rounding residue.
    """
    if convention not in STD_CONVENTIONS:
        raise ValueError(f"std convention must be one of {STD_CONVENTIONS}")
    vals = np.asarray(vals, dtype=np.float64)
    n = vals.shape[-1]
    pairs = _PAIRS if n == 5 else np.array([(i, j) for i in range(n) for j in range(i + 1, n)])
    ss = np.zeros(vals.shape[:-1])
    for i, j in pairs:  # fixed summation order, same result for any batch shape
        d = vals[..., i] - vals[..., j]
        ss = ss + d * d
    denom = n * n if convention == "population" else n * (n - 1)
    return np.sqrt(ss / denom)


def five_point_std(seg: Segment, matrix, convention: str = "population") -> float:
    n = matrix.values if isinstance(matrix, MergedMatrix) else np.asarray(matrix)
    vals = np.array([n[y - 1, x - 1] for x, y in five_points(seg)])
    return float(_std(vals, convention))


def _geometry(segments):
    """Per-segment pixel count, centroid and five-point coordinates (vectorised)."""
    count = np.array([s.xs.size for s in segments], dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(count)[:-1]))
    xs = np.concatenate([s.xs for s in segments]).astype(np.int64)
    ys = np.concatenate([s.ys for s in segments]).astype(np.int64)
    x0, x1 = np.minimum.reduceat(xs, starts), np.maximum.reduceat(xs, starts)
    y0, y1 = np.minimum.reduceat(ys, starts), np.maximum.reduceat(ys, starts)
    # integer sums are exact, so this equals the per-segment mean
    cen = np.column_stack([np.add.reduceat(xs, starts) / count,
                           np.add.reduceat(ys, starts) / count])
    pts = np.empty((len(segments), 5, 2), dtype=np.int64)
    pts[:, 0] = np.column_stack([x0, y0])
    pts[:, 1] = np.column_stack([x0, y1])
    pts[:, 2] = np.column_stack([x1, y0])
    pts[:, 3] = np.column_stack([x1, y1])
    pts[:, 4] = round_half_up(cen)
    return count.astype(np.float64), cen, pts


def _size_spread(segments, matrix, convention):
    n = matrix.values if isinstance(matrix, MergedMatrix) else np.asarray(matrix)
    count, cen, pts = _geometry(segments)
    vals = n[pts[..., 1] - 1, pts[..., 0] - 1]
    return count, _std(vals, convention), cen


def _shares(v):
    total = v.sum()
    if total == 0:
        return np.full(v.shape, 1.0 / v.size)
    return v / total


def table1_features(segments, matrix, convention: str = "population") -> np.ndarray:
    """Columns V2..V7 for each segment, shares taken over the whole list."""
    if not segments:
        raise ValueError("no segments")
    v3, v4, _ = _size_spread(segments, matrix, convention)
    v2 = v4 / v3
    return np.column_stack([v2, v3, v4, _shares(v2), _shares(v3), _shares(v4)])


def nearest_sb(seg_a: Segment, segments_b) -> Segment:
    """Partner with the closest centroid; ties go to the lower id."""
    if not segments_b:
        raise PairingError("no pairing possible: empty 4-means segment set")
    _, cb, _ = _geometry(segments_b)
    ca = np.array(seg_a.centroid)
    d2 = ((cb - ca) ** 2).sum(axis=1)
    return segments_b[int(np.argmin(d2))]


def table2_features(seg_a: Segment, segments_b, matrix,
                    convention: str = "population") -> np.ndarray:
    """V8..V13 of ``seg_a``'s nearest partner, shares taken over all of ``segments_b``."""
    partner = nearest_sb(seg_a, segments_b)
    idx = next(i for i, s in enumerate(segments_b) if s is partner)
    return table1_features(segments_b, matrix, convention)[idx]


def nearest_indices(cen_a: np.ndarray, cen_b: np.ndarray) -> np.ndarray:
    """For each centroid in ``cen_a`` the index of the closest in ``cen_b`` (lowest on ties)."""
    return _kernels.nearest_points(cen_a, cen_b)


def table3_features(own: np.ndarray, partner: np.ndarray) -> np.ndarray:
    """Ratios own/partner column by column; a zero partner gives the sentinel."""
    own = np.asarray(own, dtype=np.float64)
    partner = np.asarray(partner, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = own / partner
    return np.where(partner == 0, RATIO_SENTINEL, r)


def window_features(sa, sb, matrix, convention: str = "population") -> list[FeatureVector]:
    """All 18 variables for every 3-means segment of one window, in id order.

    Returns an empty list for an empty 3-means set and raises ``PairingError``
    if there is nothing to pair with.
    """
    if not sa:
        return []
    if not sb:
        raise PairingError("no pairing possible: empty 4-means segment set")
    sa = sorted(sa, key=lambda s: s.id)
    sb = sorted(sb, key=lambda s: s.id)
    t1 = table1_features(sa, matrix, convention)
    t2_all = table1_features(sb, matrix, convention)
    _, cen_a, _ = _geometry(sa)
    _, cen_b, _ = _geometry(sb)
    nearest = nearest_indices(cen_a, cen_b)
    t2 = t2_all[nearest]
    t3 = table3_features(t1, t2)
    rows = np.hstack([t1, t2, t3])
    return [FeatureVector(sa[i].id, sb[nearest[i]].id, *map(float, rows[i]))
            for i in range(len(sa))]


# -- ground truth ------------------------------------------------------------

@dataclass(frozen=True)
class LabelRow:
    start_frame: int
    end_frame: int
    min_x: int
    min_y: int
    max_x: int
    max_y: int

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)


LABEL_HEADER = ["start_frame", "end_frame", "min_x", "min_y", "max_x", "max_y"]


def read_labels(path) -> list[LabelRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        missing = set(LABEL_HEADER) - set(rd.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: labels header lacks {sorted(missing)}")
        return [LabelRow(*(int(r[k]) for k in LABEL_HEADER)) for r in rd]


def write_labels(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(LABEL_HEADER)
        for r in rows:
            wr.writerow([r.start_frame, r.end_frame, r.min_x, r.min_y, r.max_x, r.max_y])


def window_truth(rows, start_frame: int, end_frame: int):
    """Truth box for a frame span, or None when no labelled range overlaps it.

    Several overlapping rows: the one covering the centre frame wins, else the
    first overlapping row in file order.
    """
    hits = [r for r in rows if r.start_frame <= end_frame and r.end_frame >= start_frame]
    if not hits:
        return None
    centre = (start_frame + end_frame) // 2
    for r in hits:
        if r.start_frame <= centre <= r.end_frame:
            return r.box
    return hits[0].box


def label_positive(segments, truth_box) -> list[int]:
    """v1 per segment: at most one positive, chosen by overlap then proximity."""
    labels = [0] * len(segments)
    if truth_box is None or not segments:
        return labels
    x0, y0, x1, y1 = truth_box
    inside = [int(np.count_nonzero((s.xs >= x0) & (s.xs <= x1) & (s.ys >= y0) & (s.ys <= y1)))
              for s in segments]
    if max(inside) > 0:
        best = max(range(len(segments)), key=lambda i: (inside[i], -segments[i].id))
    else:
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        d2 = [(s.centroid[0] - cx) ** 2 + (s.centroid[1] - cy) ** 2 for s in segments]
        best = min(range(len(segments)), key=lambda i: (d2[i], segments[i].id))
    labels[best] = 1
    return labels


def write_features_csv(path, fvs) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["segment", "nearest_sb", *VARIABLES, "v1"])
        for fv in fvs:
            wr.writerow([fv.segment_id, fv.nearest_sb_id, *(repr(v) for v in fv.values()),
                         "" if fv.v1 is None else fv.v1])
