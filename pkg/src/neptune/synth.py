"""Synthetic pool footage: sinusoidal ripple plus an optional struggle patch.

Pixel ``(x, y)`` at time ``t`` (seconds) is

    clamp(round(base + ripple_amp * sin(2 pi ripple_freq t + phi(x, y))
                + [inside box, start_s <= t < end_s] amp * sin(2 pi freq t + psi(x, y))))

with rounding half up and clamping to 0..255. The phase fields are
``2 pi * u`` where ``u`` is a uniform draw from SplitMix64:

    key   = (x << 32) | y                                 (1-based x, y)
    state = seed * 0xD1342543DE82EF95 + key * 0x9E3779B97F4A7C15 + stream
    z = state;  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
                z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                z =  z ^ (z >> 31)
    u = (z >> 11) / 2**53

all modulo 2**64. ``stream`` is 1 for the ripple field and 2 for the struggle
field (plus 16 * episode index for later episodes).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import LabelRow, write_labels
from .frames import write_frame_sequence

_M64 = (1 << 64) - 1


@dataclass(frozen=True)
class Struggle:
    box: tuple[int, int, int, int]  # min_x, min_y, max_x, max_y (1-based, inclusive)
    amp: float
    freq: float
    start_s: float
    end_s: float


@dataclass(frozen=True)
class SceneSpec:
    width: int
    height: int
    fps: int = 25
    duration_s: float = 10
    water_base: float = 120
    ripple_amp: float = 4
    ripple_freq: float = 1.0
    struggle: tuple[Struggle, ...] = field(default=())
    rng_seed: int = 0

    def __post_init__(self):
        if isinstance(self.struggle, Struggle):
            object.__setattr__(self, "struggle", (self.struggle,))
        errors = []
        if self.width < 1 or self.height < 1:
            errors.append("width and height must be positive")
        if self.fps < 1 or self.duration_s <= 0:
            errors.append("fps and duration_s must be positive")
        if not 0 <= self.water_base <= 255:
            errors.append("water_base must lie in 0..255")
        if self.ripple_amp < 0:
            errors.append("ripple_amp must be non-negative")
        nyquist = self.fps / 2
        if self.ripple_amp > 0 and not 0 <= self.ripple_freq < nyquist:
            errors.append(f"ripple_freq must be below {nyquist} Hz")
        for i, s in enumerate(self.struggle):
            x0, y0, x1, y1 = s.box
            if not (1 <= x0 <= x1 <= self.width and 1 <= y0 <= y1 <= self.height):
                errors.append(f"struggle {i}: box {s.box} outside {self.width}x{self.height}")
            if s.amp < 0:
                errors.append(f"struggle {i}: amp must be non-negative")
            if not 0 <= s.freq < nyquist:
                errors.append(f"struggle {i}: freq must be below {nyquist} Hz")
            if not 0 <= s.start_s < s.end_s:
                errors.append(f"struggle {i}: need 0 <= start_s < end_s")
        if errors:
            raise ValueError("; ".join(errors))

    @property
    def frame_count(self) -> int:
        return int(round(self.fps * self.duration_s))

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        d = dict(d)
        raw = d.pop("struggle", None)
        if raw is None:
            episodes = ()
        else:
            items = raw if isinstance(raw, list) else [raw]
            episodes = tuple(Struggle(tuple(int(v) for v in s["box"]), float(s["amp"]),
                                      float(s["freq"]), float(s["start_s"]), float(s["end_s"]))
                             for s in items)
        unknown = set(d) - {f for f in cls.__dataclass_fields__ if f != "struggle"}
        if unknown:
            raise ValueError(f"unknown scene fields: {sorted(unknown)}")
        return cls(struggle=episodes, **d)

    @classmethod
    def load(cls, path) -> "SceneSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def splitmix_uniform(xs, ys, seed: int, stream: int) -> np.ndarray:
    """Uniform [0, 1) draw per (x, y) using the SplitMix64 finaliser."""
    xs = np.asarray(xs, dtype=np.uint64)
    ys = np.asarray(ys, dtype=np.uint64)
    base = np.uint64((seed * 0xD1342543DE82EF95 + stream) & _M64)
    with np.errstate(over="ignore"):
        key = (xs << np.uint64(32)) | ys
        z = base + key * np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def phase_field(width: int, height: int, seed: int, stream: int) -> np.ndarray:
    ys, xs = np.mgrid[1:height + 1, 1:width + 1]
    return 2 * math.pi * splitmix_uniform(xs, ys, seed, stream)


def _active_frames(fps, n, start_s, end_s):
    t = np.arange(n) / fps
    return np.flatnonzero((t >= start_s) & (t < end_s))


def render(spec: SceneSpec) -> tuple[np.ndarray, list[LabelRow]]:
    """Frames as a ``(T, H, W)`` uint8 stack plus one label row per episode."""
    n = spec.frame_count
    h, w = spec.height, spec.width
    frames = np.empty((n, h, w), dtype=np.uint8)
    phi = phase_field(w, h, spec.rng_seed, 1)
    episodes = []
    labels = []
    for i, s in enumerate(spec.struggle):
        x0, y0, x1, y1 = s.box
        psi = phase_field(w, h, spec.rng_seed, 2 + 16 * i)[y0 - 1:y1, x0 - 1:x1]
        active = _active_frames(spec.fps, n, s.start_s, s.end_s)
        episodes.append((s, psi, set(active.tolist())))
        if active.size:
            labels.append(LabelRow(int(active[0]) + 1, int(active[-1]) + 1, x0, y0, x1, y1))
    for f in range(n):
        t = f / spec.fps
        v = spec.water_base + spec.ripple_amp * np.sin(2 * math.pi * spec.ripple_freq * t + phi)
        for s, psi, active in episodes:
            if f in active:
                x0, y0, x1, y1 = s.box
                v[y0 - 1:y1, x0 - 1:x1] += s.amp * np.sin(2 * math.pi * s.freq * t + psi)
        frames[f] = np.clip(np.floor(v + 0.5), 0, 255).astype(np.uint8)
    return frames, labels


def write_scene(spec: SceneSpec, out_dir) -> tuple[Path, Path]:
    """Render to ``out_dir/frames/*.pgm`` and ``out_dir/labels.csv``."""
    out_dir = Path(out_dir)
    frames, labels = render(spec)
    frame_dir = out_dir / "frames"
    write_frame_sequence(frame_dir, list(frames))
    label_path = out_dir / "labels.csv"
    write_labels(label_path, labels)
    return frame_dir, label_path
