"""Frame loading, grayscale conversion, cropping and windowing.

Images are held as ``uint8`` arrays of shape ``(height, width)``. Public
coordinates are 1-based ``(x, y)``: ``x`` runs along the width and ``y`` along
the height, so pixel ``(x, y)`` is ``values[y - 1, x - 1]``.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

FORMATS = ("pgm_dir", "png_dir", "raw_y8")
WINDOW_LENGTHS = (1, 2, 3, 4, 5)


class FrameError(ValueError):
    """Bad frame input: missing path, unreadable file or inconsistent sizes."""


@dataclass(frozen=True)
class GrayImage:
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise FrameError(f"image must be a non-empty 2-D grid, got shape {v.shape}")
        if v.dtype != np.uint8:
            if np.any(v < 0) or np.any(v > 255):
                raise FrameError("intensities must lie in [0, 255]")
            v = v.astype(np.uint8)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def at(self, x: int, y: int) -> int:
        return int(self.values[y - 1, x - 1])

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class FrameWindow:
    """``duration_s`` seconds of frames; ``start_frame`` is 1-based."""

    frames: np.ndarray = field(repr=False)  # (T, H, W) uint8
    fps: int
    duration_s: int
    start_frame: int = 1

    def __post_init__(self):
        if self.frames.ndim != 3:
            raise FrameError("window frames must be a (T, H, W) stack")
        if self.frames.shape[0] != self.fps * self.duration_s:
            raise FrameError(
                f"window holds {self.frames.shape[0]} frames, expected "
                f"{self.fps * self.duration_s} ({self.duration_s} s at {self.fps} fps)")

    @property
    def end_frame(self) -> int:
        return self.start_frame + self.frames.shape[0] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames.shape[1], self.frames.shape[2]


def to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luma ``round(0.299 R + 0.587 G + 0.114 B)`` with halves rounded up."""
    rgb = np.asarray(rgb)
    if rgb.ndim == 2:
        return rgb.astype(np.uint8)
    r, g, b = (rgb[..., i].astype(np.int64) for i in range(3))
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def stack(frames: Sequence[GrayImage]) -> np.ndarray:
    if not frames:
        raise FrameError("no frames")
    shape = (frames[0].height, frames[0].width)
    for i, f in enumerate(frames):
        if (f.height, f.width) != shape:
            raise FrameError(f"frame {i} is {f.width}x{f.height}, expected {shape[1]}x{shape[0]}")
    return np.stack([f.values for f in frames])


# -- PGM ---------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s*(?:#[^\n]*\n)?)*\s*(\S+)")


def read_pgm(path) -> GrayImage:
    """Read a binary (P5) 8-bit PGM."""
    data = Path(path).read_bytes()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise FrameError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = tokens
    if magic != b"P5":
        raise FrameError(f"{path}: not a binary PGM (magic {magic!r})")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FrameError(f"{path}: malformed PGM header") from None
    if maxval > 255:
        raise FrameError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    pixels = data[pos + 1:pos + 1 + w * h]
    if len(pixels) != w * h:
        raise FrameError(f"{path}: expected {w * h} pixel bytes, found {len(pixels)}")
    return GrayImage(np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy())


def write_pgm(path, img) -> None:
    values = img.values if isinstance(img, GrayImage) else np.asarray(img, dtype=np.uint8)
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(values, dtype=np.uint8).tobytes())


def read_png(path) -> GrayImage:
    from PIL import Image

    try:
        with Image.open(path) as im:
            if im.mode in ("L", "I;16", "I", "1"):
                arr = np.asarray(im.convert("L"))
            else:
                arr = to_gray(np.asarray(im.convert("RGB")))
    except (OSError, ValueError) as exc:
        raise FrameError(f"{path}: unreadable PNG ({exc})") from None
    return GrayImage(arr)


# -- sequences ---------------------------------------------------------------

def load_frame_sequence(path, format: str = "pgm_dir", *, width: int | None = None,
                        height: int | None = None) -> list[GrayImage]:
    """Load frames in lexicographic filename order (or byte order for raw_y8)."""
    path = Path(path)
    if format not in FORMATS:
        raise FrameError(f"unknown frame format {format!r}; expected one of {FORMATS}")
    if not path.exists():
        raise FrameError(f"{path}: no such file or directory")

    if format == "raw_y8":
        if not width or not height:
            raise FrameError("raw_y8 input needs width and height")
        size = width * height
        data = path.read_bytes()
        if len(data) % size:
            raise FrameError(f"{path}: size {len(data)} is not a multiple of {width}x{height}")
        arr = np.frombuffer(data, dtype=np.uint8).reshape(-1, height, width)
        return [GrayImage(a.copy()) for a in arr]

    if not path.is_dir():
        raise FrameError(f"{path}: expected a directory of frames")
    suffix = ".pgm" if format == "pgm_dir" else ".png"
    reader = read_pgm if format == "pgm_dir" else read_png
    names = sorted(n for n in os.listdir(path) if n.lower().endswith(suffix))
    if not names:
        raise FrameError(f"{path}: no {suffix} files")
    frames = []
    for name in names:
        try:
            img = reader(path / name)
        except FrameError:
            raise
        except OSError as exc:
            raise FrameError(f"{path / name}: unreadable ({exc})") from None
        if frames and (img.width, img.height) != (frames[0].width, frames[0].height):
            raise FrameError(
                f"{path / name}: size {img.width}x{img.height} differs from "
                f"{frames[0].width}x{frames[0].height}")
        frames.append(img)
    return frames


def write_frame_sequence(path, frames, prefix: str = "frame") -> list[Path]:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    digits = max(6, len(str(len(frames))))
    out = []
    for i, f in enumerate(frames, start=1):
        p = path / f"{prefix}_{i:0{digits}d}.pgm"
        write_pgm(p, f)
        out.append(p)
    return out


def crop(img: GrayImage, x0: int, y0: int, w: int, h: int) -> GrayImage:
    """Sub-image whose (1, 1) is ``(x0, y0)`` of ``img``."""
    if x0 < 1 or y0 < 1 or w < 1 or h < 1 or x0 + w - 1 > img.width or y0 + h - 1 > img.height:
        raise FrameError(
            f"crop ({x0},{y0},{w},{h}) outside {img.width}x{img.height} image")
    return GrayImage(img.values[y0 - 1:y0 - 1 + h, x0 - 1:x0 - 1 + w].copy())


def partition_windows(frames, fps: int, duration_s: int, stride_s: int = 1) -> list[FrameWindow]:
    """Windows of exactly ``fps * duration_s`` frames every ``stride_s`` seconds.

    ``frames`` may be a list of GrayImage or a ``(T, H, W)`` array. A trailing
    partial window is dropped.
    """
    if duration_s not in WINDOW_LENGTHS:
        raise FrameError(f"window length must be one of {WINDOW_LENGTHS}, got {duration_s}")
    if fps < 1 or stride_s < 1:
        raise FrameError("fps and stride must be positive")
    arr = frames if isinstance(frames, np.ndarray) else stack(frames)
    n = fps * duration_s
    if arr.shape[0] < n:
        raise FrameError(
            f"{arr.shape[0]} frames is too few for one {duration_s} s window at {fps} fps")
    step = fps * stride_s
    return [FrameWindow(arr[s:s + n], fps, duration_s, s + 1)
            for s in range(0, arr.shape[0] - n + 1, step)]
