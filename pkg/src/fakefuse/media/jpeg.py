"""Blockwise JPEG quantization round trip (artifacts without entropy coding).

Each 8x8 block is level-shifted, transformed with the orthonormal 2D
DCT-II, divided by the scaled quantization table, rounded, multiplied back
and inverted. Entropy coding is lossless and deliberately omitted. The
cycle runs to an internal fixed point so that re-encoding at the same
quality factor is bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn

from ..errors import ParameterError
from .frame import Frame

# standard luminance quantization table
BASE_LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)

_RGB_TO_YCC = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YCC_TO_RGB = np.linalg.inv(_RGB_TO_YCC)


@dataclass
class JpegConfig:
    quality: int = 75
    base_table: np.ndarray = field(default_factory=lambda: BASE_LUMA_TABLE.copy())

    def __post_init__(self):
        if not 1 <= int(self.quality) <= 100:
            raise ParameterError(f"quality factor must be in [1, 100], got {self.quality}")
        self.quality = int(self.quality)
        self.base_table = np.asarray(self.base_table, dtype=np.int64)
        if self.base_table.shape != (8, 8) or (self.base_table < 1).any():
            raise ParameterError("base table must be 8x8 positive integers")


def quality_table(config: JpegConfig) -> np.ndarray:
    """Scale the base table by the classic quality-factor rule."""
    qf = config.quality
    s = 5000 // qf if qf < 50 else 200 - 2 * qf
    scaled = (config.base_table * s + 50) // 100
    return np.clip(scaled, 1, 255).astype(np.int64)


def rgb_to_ycbcr(pixels: np.ndarray) -> np.ndarray:
    ycc = pixels @ _RGB_TO_YCC.T
    ycc[:, :, 1:] += 0.5
    return ycc


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    ycc = ycc.copy()
    ycc[:, :, 1:] -= 0.5
    return ycc @ _YCC_TO_RGB.T


def _pad_reflect_to_blocks(plane: np.ndarray) -> tuple[np.ndarray, int, int]:
    h, w = plane.shape
    ph = (-h) % 8
    pw = (-w) % 8
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="symmetric")
    return plane, h, w


def block_dct(plane: np.ndarray) -> np.ndarray:
    """8x8 block view DCT: (H, W) -> (H/8, W/8, 8, 8) coefficients."""
    h, w = plane.shape
    blocks = plane.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)
    return dctn(blocks, axes=(2, 3), norm="ortho")


def block_idct(coeffs: np.ndarray) -> np.ndarray:
    nby, nbx = coeffs.shape[:2]
    blocks = idctn(coeffs, axes=(2, 3), norm="ortho")
    return blocks.transpose(0, 2, 1, 3).reshape(nby * 8, nbx * 8)


def _quantize_plane(plane_255: np.ndarray, table: np.ndarray) -> np.ndarray:
    coeffs = block_dct(plane_255 - 128.0)
    q = np.rint(coeffs / table)
    return block_idct(q * table) + 128.0


def jpeg_round_trip(frame: Frame, config: JpegConfig) -> Frame:
    """Apply the quantization artifacts of one JPEG save/load cycle."""
    table = quality_table(config).astype(np.float64)
    px = frame.pixels
    rgb = px.shape[2] == 3
    current = px
    for _ in range(8):
        planes = rgb_to_ycbcr(current) if rgb else current
        out = np.empty_like(planes)
        for c in range(planes.shape[2]):
            padded, h, w = _pad_reflect_to_blocks(planes[:, :, c] * 255.0)
            rec = _quantize_plane(padded, table)
            out[:, :, c] = rec[:h, :w] / 255.0
        result = ycbcr_to_rgb(out) if rgb else out
        result = np.clip(result, 0.0, 1.0)
        if np.array_equal(result, current):
            break
        current = result
    return Frame(current, frame.source_timestamp_s)
