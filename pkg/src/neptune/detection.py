"""Multi-length detection over frame streams, plus the linear baselines."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .features import VARIABLES, FeatureVector
from .frames import FrameError, FrameWindow
from .model import DetectorModel
from .pipeline import RunConfig, analyze_window, ordered_map, worker_count
from .quantization import bin_values


def _config_for(model: DetectorModel, threads=None) -> RunConfig:
    return RunConfig(**model.settings, window_lengths=tuple(sorted(model.entries)),
                     threads=threads)


def detect_window(model: DetectorModel, window: FrameWindow,
                  config: RunConfig | None = None) -> tuple[bool, list[int]]:
    """Whether any segment of ``window`` satisfies a rule, and which segments do."""
    if window.duration_s not in model.entries:
        raise ValueError(f"model has no {window.duration_s} s entry")
    config = config or _config_for(model)
    table, ruleset = model.entries[window.duration_s]
    a = analyze_window(window, config)
    if not a.features:
        return False, []
    rows = np.array([fv.values() for fv in a.features])
    hit = ruleset.fires(bin_values(rows, table.matrix()))
    ids = [fv.segment_id for fv, h in zip(a.features, hit) if h]
    return bool(ids), ids


@dataclass
class DetectionTimeline:
    seconds: int
    lengths: tuple[int, ...]
    detected: dict[tuple[int, int], bool] = field(default_factory=dict)
    segment_ids: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    frame_ranges: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)

    def at(self, t: int, m: int) -> bool:
        return self.detected.get((t, m), False)

    def union(self, t: int) -> bool:
        return any(self.at(t, m) for m in self.lengths)

    def union_row(self) -> list[bool]:
        return [self.union(t) for t in range(1, self.seconds + 1)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["second", "window_s", "detected", "segment_ids"])
            for (t, m) in sorted(self.detected):
                ids = " ".join(map(str, self.segment_ids.get((t, m), [])))
                wr.writerow([t, m, int(self.detected[(t, m)]), ids])

    def write_union_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["second", "union"])
            for t in range(1, self.seconds + 1):
                wr.writerow([t, int(self.union(t))])


def window_span(t: int, m: int, fps: int) -> tuple[int, int]:
    """1-based inclusive frames of the ``m``-second window ending at second ``t``."""
    return (t - m) * fps + 1, t * fps


def detect_stream(model: DetectorModel, frames: np.ndarray, fps: int | None = None,
                  threads: int | None = None) -> DetectionTimeline:
    """Evaluate every window length at every whole second of the stream.

    The ``m``-second window for second ``t`` covers frames ``(t - m) fps + 1``
    to ``t fps`` and is only evaluated once ``t >= m``. Evaluations are
    independent and assembled in (t, m) order.
    """
    fps = fps or model.fps
    if fps != model.fps:
        raise ValueError(f"stream fps {fps} differs from model fps {model.fps}")
    lengths = tuple(sorted(model.entries))
    seconds = frames.shape[0] // fps
    if seconds < max(lengths):
        raise FrameError(f"stream of {seconds} s is shorter than the longest window "
                         f"({max(lengths)} s)")
    config = _config_for(model, threads)
    tasks = [(t, m) for t in range(1, seconds + 1) for m in lengths if t >= m]

    def run(task):
        t, m = task
        lo, hi = window_span(t, m, fps)
        win = FrameWindow(frames[lo - 1:hi], fps, m, lo)
        return detect_window(model, win, config)

    results = ordered_map(run, tasks, worker_count(config))
    tl = DetectionTimeline(seconds, lengths)
    for (t, m), (hit, ids) in zip(tasks, results):
        tl.detected[(t, m)] = hit
        tl.segment_ids[(t, m)] = ids
        tl.frame_ranges[(t, m)] = window_span(t, m, fps)
    return tl


# -- baselines ----------------------------------------------------------------

# Variables 14..19 are the six ratios, in order.
ALIASES = {f"V{14 + i}": name for i, name in enumerate(VARIABLES[12:])}


@dataclass(frozen=True)
class BaselineFormula:
    window_s: int
    coefficients: dict[str, float]
    intercept: float
    name: str = ""

    def __post_init__(self):
        bad = [k for k in self.coefficients if k not in VARIABLES]
        if bad:
            raise ValueError(f"unknown variables {bad}")


def _formula(window_s, name, intercept, **terms):
    return BaselineFormula(window_s, {ALIASES.get(k, k): v for k, v in terms.items()},
                           intercept, name)


FORMULAS = {
    5: _formula(5, "3a", 0.1227, V2=-0.6882, V6=0.8153, V7=-1.1143, V9=-0.0003874,
                V12=13.0915, V6_12=-0.001769, V7_13=0.002818),
    4: _formula(4, "3b", -0.00123, V4=0.01103, V15=0.00107),
    3: _formula(3, "3c", -0.09636, V2=-0.3232, V3=0.0001431, V6=-0.1553, V8=-0.2502),
    2: _formula(2, "3d", 0.03580, V4=0.01665, V6=-0.1753, V8=-0.2300, V9=0.0002441,
                V12=-7.6024, V4_10=-0.005745),
    1: _formula(1, "3e", 0.58134, V2=-0.2072, V4=0.01528, V6=-0.1563, V9=0.000243,
                V10=-0.01994, V11=-2.9549, V12=-7.4156, V13=7.6710, V16=-0.004826),
}


def eval_baseline(formula: BaselineFormula, fv) -> float:
    """Intercept plus the weighted raw (unbinned) variables."""
    get = fv.get if isinstance(fv, FeatureVector) else fv.__getitem__
    score = formula.intercept
    for name, coef in formula.coefficients.items():
        score += coef * get(name)
    return score


def pearson(actual, predicted) -> float:
    x = np.asarray(actual, dtype=np.float64)
    y = np.asarray(predicted, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two equal-length 1-D sequences")
    if x.size < 2:
        raise ValueError("pearson needs at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined: zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
