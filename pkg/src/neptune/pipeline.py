"""Window analysis and training: merge, segment, describe, bin, mine."""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .features import (FeatureVector, PairingError, feature_matrix, label_positive,
                       window_features, window_truth)
from .model import DetectorModel
from .frames import WINDOW_LENGTHS, FrameError, FrameWindow, partition_windows
from .quantization import (PERCENTILE_METHOD, PercentileTable, bin_values, builtin_table,
                           compute_percentiles, repaired_table)
from .rules import LabeledDataset, RuleSet, coverage_report, select_final, sweep_rulesets
from .segmentation import Segmentation, segment_matrix
from .spectral import MergedMatrix, merge_window

log = logging.getLogger(__name__)

PERCENTILE_SOURCES = ("computed", "builtin", "builtin_repaired")

# settings that change what a trained model means; must match at detection
MODEL_KEYS = ("fps", "dc_policy", "adjacency", "std_convention", "percentile_method",
              "kmeans_init")


@dataclass
class RunConfig:
    fps: int = 25
    crop: tuple[int, int, int, int] | None = None
    dc_policy: str = "exclude_dc"
    adjacency: str = "four"
    std_convention: str = "population"
    percentile_method: str = PERCENTILE_METHOD
    percentile_source: str = "computed"
    kmeans_init: str = "optimal"
    stride_s: int = 1
    window_lengths: tuple[int, ...] = WINDOW_LENGTHS
    frame_format: str = "pgm_dir"
    width: int | None = None   # raw_y8 only
    height: int | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.crop is not None:
            self.crop = tuple(int(v) for v in self.crop)
        self.window_lengths = tuple(int(m) for m in self.window_lengths)
        if self.percentile_source not in PERCENTILE_SOURCES:
            raise ValueError(f"percentile_source must be one of {PERCENTILE_SOURCES}")
        if self.percentile_method != PERCENTILE_METHOD:
            raise ValueError(f"only percentile_method={PERCENTILE_METHOD!r} is implemented")
        if any(m not in WINDOW_LENGTHS for m in self.window_lengths):
            raise ValueError(f"window lengths must come from {WINDOW_LENGTHS}")

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def model_settings(self) -> dict:
        return {k: getattr(self, k) for k in MODEL_KEYS}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["crop"] = list(self.crop) if self.crop else None
        d["window_lengths"] = list(self.window_lengths)
        return d


def worker_count(config: RunConfig | None = None) -> int:
    if config is not None and config.threads:
        return max(1, int(config.threads))
    env = os.environ.get("NEPTUNE_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(5, os.cpu_count() or 1))


def ordered_map(fn, items, workers: int):
    """``map`` that may run concurrently but always returns results in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def crop_stack(frames: np.ndarray, crop) -> np.ndarray:
    if crop is None:
        return frames
    x0, y0, w, h = crop
    _, height, width = frames.shape
    if x0 < 1 or y0 < 1 or x0 + w - 1 > width or y0 + h - 1 > height:
        raise FrameError(f"crop {tuple(crop)} outside {width}x{height} frames")
    return frames[:, y0 - 1:y0 - 1 + h, x0 - 1:x0 - 1 + w]


@dataclass
class WindowAnalysis:
    window_s: int
    start_frame: int
    end_frame: int
    matrix: MergedMatrix = field(repr=False)
    segmentation: Segmentation = field(repr=False)
    features: list[FeatureVector] = field(repr=False)
    status: str = "ok"   # ok | no_signal | no_pairing

    @property
    def segment_ids(self) -> list[int]:
        return [fv.segment_id for fv in self.features]


def analyze_window(window: FrameWindow, config: RunConfig) -> WindowAnalysis:
    matrix = merge_window(window, config.dc_policy)
    seg = segment_matrix(matrix, config.adjacency, config.kmeans_init)
    status = "no_signal" if seg.no_signal else "ok"
    try:
        fvs = window_features(seg.sa, seg.sb, matrix, config.std_convention)
    except PairingError:
        fvs, status = [], "no_pairing"
    return WindowAnalysis(window.duration_s, window.start_frame, window.end_frame,
                          matrix, seg, fvs, status)


# -- training ----------------------------------------------------------------

@dataclass
class WindowRecord:
    start_frame: int
    end_frame: int
    positive: bool
    features: list[FeatureVector] = field(repr=False)
    undetectable: bool = False


@dataclass
class LengthSummary:
    window_s: int
    positive_windows: int
    negative_windows: int
    positive_segments: int
    negative_segments: int
    undetectable: int
    coverage: list[dict]
    num_variables: int
    rules: int
    positives_covered: int


@dataclass
class TrainedLength:
    table: PercentileTable
    ruleset: RuleSet
    summary: LengthSummary
    dataset: LabeledDataset = field(repr=False)
    records: list[WindowRecord] = field(repr=False)


class TrainingError(RuntimeError):
    pass


def collect_records(frames: np.ndarray, labels, window_s: int, config: RunConfig) -> list[WindowRecord]:
    windows = partition_windows(frames, config.fps, window_s, config.stride_s)

    def one(win):
        a = analyze_window(win, config)
        box = window_truth(labels, win.start_frame, win.end_frame)
        v1 = label_positive(a.segmentation.sa if a.features else [], box)
        for fv, lab in zip(a.features, v1):
            fv.v1 = lab
        return WindowRecord(win.start_frame, win.end_frame, box is not None, a.features,
                            undetectable=box is not None and not a.features)

    return ordered_map(one, windows, worker_count(config))


def _table_for(window_s, rows, config):
    src = config.percentile_source
    if src == "builtin":
        return builtin_table(window_s)
    computed = compute_percentiles(rows, window_s)
    if src == "builtin_repaired":
        return repaired_table(window_s, computed)
    return computed


def train_length(frames, labels, window_s: int, config: RunConfig) -> TrainedLength:
    records = collect_records(frames, labels, window_s, config)
    fvs = [fv for r in records for fv in r.features]
    rows = feature_matrix(fvs)
    y = np.array([fv.v1 for fv in fvs], dtype=np.int64)
    if rows.shape[0] < 4:
        raise TrainingError(f"{window_s} s: only {rows.shape[0]} segments, need at least 4")
    table = _table_for(window_s, rows, config)
    data = LabeledDataset(window_s, bin_values(rows, table.matrix()), y)
    if data.positives:
        sweep = sweep_rulesets(data)
        coverage = coverage_report(sweep)
        try:
            final = select_final(sweep)
        except ValueError:
            log.warning("%d s: no confidence-1 rule exists", window_s)
            final = RuleSet(window_s, 0, np.zeros((0, rows.shape[1]), np.int8), np.zeros(0, np.int64))
    else:
        log.warning("%d s: no positive segments to learn from", window_s)
        coverage = []
        final = RuleSet(window_s, 0, np.zeros((0, rows.shape[1]), np.int8), np.zeros(0, np.int64))
    summary = LengthSummary(
        window_s,
        positive_windows=sum(r.positive for r in records),
        negative_windows=sum(not r.positive for r in records),
        positive_segments=data.positives,
        negative_segments=data.negatives,
        undetectable=sum(r.undetectable for r in records),
        coverage=coverage,
        num_variables=final.num_variables,
        rules=len(final),
        positives_covered=final.total_positives_covered,
    )
    return TrainedLength(table, final, summary, data, records)


def train(frames: np.ndarray, labels, config: RunConfig):
    """Train every configured window length. Returns ``(model, {m: TrainedLength})``."""
    frames = crop_stack(frames, config.crop)
    if not labels:
        raise TrainingError("labels file has no struggle rows; nothing to learn")
    out = {}
    for m in config.window_lengths:
        out[m] = train_length(frames, labels, m, config)
    if not any(t.summary.positive_windows for t in out.values()):
        raise TrainingError("no positive windows in the training stream")
    model = DetectorModel(config.model_settings(),
                          {m: (t.table, t.ruleset) for m, t in out.items()},
                          percentile_source=config.percentile_source)
    return model, out
