"""Frames, clip sampling and lossless image I/O.

A Frame holds float64 pixels in [0, 1], row-major and channel-last. Clip
sources are frame directories (``frame_%06d`` naming) or explicit path
lists; sampling picks the nearest stored frame for each target timestamp.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import DecodeError, EmptyClipError, ParameterError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_FRAME_NAME = re.compile(r"frame_(\d+)\.(png|ppm|pgm|bmp)$", re.IGNORECASE)


@dataclass
class Frame:
    """H x W x C pixel array in [0, 1] plus the source timestamp."""

    pixels: np.ndarray
    source_timestamp_s: float = 0.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise ParameterError(f"frame must be HxWx1 or HxWx3, got {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ParameterError("frame pixels must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ParameterError("frame pixels must lie in [0, 1]")
        self.pixels = px

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


def frame_from_array(arr: np.ndarray, timestamp_s: float = 0.0, clamp: bool = True) -> Frame:
    """Build a Frame, optionally clamping numeric spill to [0, 1]."""
    arr = np.asarray(arr, dtype=np.float64)
    if clamp:
        arr = np.clip(arr, 0.0, 1.0)
    return Frame(arr, source_timestamp_s=timestamp_s)


def to_gray(frame: Frame) -> np.ndarray:
    """Luma plane (H, W) using the 0.299/0.587/0.114 weights."""
    if frame.channels == 1:
        return frame.pixels[:, :, 0]
    return frame.pixels @ LUMA_WEIGHTS


def decode_image(path) -> Frame:
    """Load a lossless image file as a Frame."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("L", "I;16", "I"):
                arr = np.asarray(img.convert("L"), dtype=np.float64)[:, :, None]
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc
    return Frame(arr / 255.0)


def encode_image(frame: Frame, path) -> None:
    """Write a Frame as an 8-bit lossless image (format from the suffix)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.clip(np.rint(frame.pixels * 255.0), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        Image.fromarray(arr[:, :, 0], mode="L").save(path)
    else:
        Image.fromarray(arr, mode="RGB").save(path)


def quantize_to_8bit(frame: Frame) -> Frame:
    """Round pixels to the 8-bit grid (what encode_image persists)."""
    return Frame(np.rint(frame.pixels * 255.0) / 255.0, frame.source_timestamp_s)


@dataclass
class ClipSpec:
    """Where clip frames come from and how to sample them.

    ``source`` is a frame directory or an ordered list of image paths.
    ``source_fps`` describes the stored frame rate; ``sample_fps`` is the
    output rate (25 offline, 8 in the service).
    """

    source: object
    start_s: float
    end_s: float
    sample_fps: float = 25.0
    source_fps: float = 25.0

    def __post_init__(self):
        if self.sample_fps <= 0 or self.source_fps <= 0:
            raise ParameterError("frame rates must be positive")
        if not self.end_s > self.start_s:
            raise EmptyClipError(
                f"window [{self.start_s}, {self.end_s}] has no positive length"
            )


def _source_paths(source) -> list[Path]:
    if isinstance(source, (list, tuple)):
        paths = [Path(p) for p in source]
        missing = [p for p in paths if not p.exists()]
        if missing:
            raise DecodeError(f"missing source frames: {missing[:3]}")
        return paths
    root = Path(source)
    if not root.is_dir():
        raise DecodeError(f"frame source {root} is not a readable directory")
    found = []
    for p in root.iterdir():
        m = _FRAME_NAME.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort()
    return [p for _, p in found]


def sample_frames(clip: ClipSpec) -> list[Frame]:
    """Frames at start_s + k/sample_fps for k = 0, 1, ... while < end_s.

    A 10 s window at 8 fps therefore yields exactly 80 frames.
    """
    paths = _source_paths(clip.source)
    if not paths:
        raise EmptyClipError(f"no frames found in {clip.source}")
    length = clip.end_s - clip.start_s
    # half-open [start, end); tiny epsilon absorbs float fuzz at the boundary
    count = int(np.ceil(length * clip.sample_fps - 1e-9))
    count = max(count, 1)
    frames = []
    for k in range(count):
        t = clip.start_s + k / clip.sample_fps
        idx = min(len(paths) - 1, max(0, int(round(t * clip.source_fps))))
        frame = decode_image(paths[idx])
        frame.source_timestamp_s = t
        frames.append(frame)
    return frames
