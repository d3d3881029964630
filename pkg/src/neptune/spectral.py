"""Per-pixel temporal spectrum merge.

Each pixel's intensity series across a window is reduced to the largest DFT
magnitude, and the resulting grid is min-max normalised into ``N``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .frames import FrameWindow, write_pgm

DC_POLICIES = ("exclude_dc", "include_dc")


@dataclass(frozen=True)
class MergedMatrix:
    values: np.ndarray = field(repr=False)  # (height, width) in [0, 1]
    dc_policy: str = "exclude_dc"
    raw_min: float = 0.0
    raw_max: float = 0.0

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def no_signal(self) -> bool:
        return not self.raw_max > self.raw_min

    def scaled(self, c: float) -> "MergedMatrix":
        return MergedMatrix(self.values * c, self.dc_policy, self.raw_min, self.raw_max)


@dataclass(frozen=True)
class FlatArray:
    values: np.ndarray = field(repr=False)
    width: int
    height: int


def _check_policy(dc_policy):
    if dc_policy not in DC_POLICIES:
        raise ValueError(f"dc_policy must be one of {DC_POLICIES}, got {dc_policy!r}")


def max_abs_fft(series, dc_policy: str = "exclude_dc") -> float:
    """Largest ``|X[k]|`` of the length-L DFT of ``series``.

    ``exclude_dc`` skips bin 0. Real input means bins k and L-k share a
    magnitude, so the half spectrum suffices.
    """
    _check_policy(dc_policy)
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("series needs at least 2 samples")
    mags = np.abs(np.fft.rfft(x))
    if dc_policy == "exclude_dc":
        mags = mags[1:]
    return float(mags.max())


def raw_spectral_max(frames: np.ndarray, dc_policy: str = "exclude_dc",
                     rows_per_chunk: int = 32) -> np.ndarray:
    """``max_abs_fft`` for every pixel of a ``(T, H, W)`` stack."""
    _check_policy(dc_policy)
    t, h, w = frames.shape
    if t < 2:
        raise ValueError("window needs at least 2 frames")
    lo = 1 if dc_policy == "exclude_dc" else 0
    out = np.empty((h, w), dtype=np.float64)
    for r0 in range(0, h, rows_per_chunk):
        block = frames[:, r0:r0 + rows_per_chunk, :].astype(np.float64)
        spec = np.fft.rfft(block, axis=0)[lo:]
        out[r0:r0 + rows_per_chunk] = np.abs(spec).max(axis=0)
    return out


def normalize(raw: np.ndarray, dc_policy: str = "exclude_dc") -> MergedMatrix:
    lo, hi = float(raw.min()), float(raw.max())
    if hi > lo:
        values = (raw - lo) / (hi - lo)
    else:
        # no variation anywhere: no-signal window
        values = np.zeros_like(raw, dtype=np.float64)
    return MergedMatrix(values, dc_policy, lo, hi)


def merge_window(window: FrameWindow, dc_policy: str = "exclude_dc") -> MergedMatrix:
    return normalize(raw_spectral_max(window.frames, dc_policy), dc_policy)


def flatten(matrix) -> FlatArray:
    """Row-major flattening: 1-based ``(x, y)`` lands at ``(y - 1) * width + x``."""
    values = matrix.values if isinstance(matrix, MergedMatrix) else np.asarray(matrix)
    h, w = values.shape
    return FlatArray(values.reshape(-1).copy(), w, h)


def unflatten(flat: FlatArray) -> np.ndarray:
    return flat.values.reshape(flat.height, flat.width)


def flat_index(x: int, y: int, width: int) -> int:
    """1-based flat position of 1-based pixel ``(x, y)``."""
    return (y - 1) * width + x


def dump_pgm(matrix: MergedMatrix, path) -> None:
    write_pgm(path, np.floor(matrix.values * 255 + 0.5).astype(np.uint8))


def dump_csv(matrix: MergedMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "y", "value"])
        h, w = matrix.values.shape
        for y in range(h):
            for x in range(w):
                wr.writerow([x + 1, y + 1, repr(float(matrix.values[y, x]))])
