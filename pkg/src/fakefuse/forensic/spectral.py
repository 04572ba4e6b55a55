"""Frequency-domain descriptors: full-frame DCT and its radial profile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from ..errors import ShapeError

N_RADIAL_BINS = 64
BAND_CUTS = (0.25, 0.6)  # low/mid and mid/high boundaries in normalized radius


def dct2_full(gray: np.ndarray) -> np.ndarray:
    """Orthonormal 2D DCT-II of a square grayscale plane."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or gray.shape[0] != gray.shape[1]:
        raise ShapeError(f"dct2_full needs a square plane, got {gray.shape}")
    return dctn(gray, norm="ortho")


def idct2_full(coeffs: np.ndarray) -> np.ndarray:
    return idctn(np.asarray(coeffs, dtype=np.float64), norm="ortho")


def block_dct_coeffs(gray: np.ndarray) -> np.ndarray:
    """8x8 block DCT on the level-shifted 0..255 scale: (nby, nbx, 8, 8)."""
    gray = np.asarray(gray, dtype=np.float64)
    h, w = gray.shape
    nby, nbx = h // 8, w // 8
    if nby == 0 or nbx == 0:
        raise ShapeError("plane smaller than one 8x8 block")
    v = gray[: nby * 8, : nbx * 8] * 255.0 - 128.0
    blocks = v.reshape(nby, 8, nbx, 8).transpose(0, 2, 1, 3)
    return dctn(blocks, axes=(2, 3), norm="ortho")


@dataclass
class SpectralProfile:
    radial_bins: np.ndarray  # 64 azimuthally averaged log magnitudes
    band_ratios: np.ndarray  # low/mid/high energy fractions, sum 1


def radial_profile(coeffs: np.ndarray) -> SpectralProfile:
    """Azimuthal average of log coefficient magnitude plus band energy fractions."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.shape[0]
    if coeffs.shape != (n, n):
        raise ShapeError("radial_profile expects square coefficients")
    u, v = np.mgrid[0:n, 0:n]
    r = np.sqrt(u**2 + v**2) / (np.sqrt(2.0) * (n - 1))
    idx = np.minimum((r * N_RADIAL_BINS).astype(int), N_RADIAL_BINS - 1)

    logmag = np.log1p(np.abs(coeffs))
    sums = np.bincount(idx.ravel(), weights=logmag.ravel(), minlength=N_RADIAL_BINS)
    counts = np.bincount(idx.ravel(), minlength=N_RADIAL_BINS)
    bins = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)

    energy = coeffs**2
    low = float(energy[r < BAND_CUTS[0]].sum())
    high = float(energy[r > BAND_CUTS[1]].sum())
    total = float(energy.sum())
    if total <= 0.0:
        ratios = np.array([1.0, 0.0, 0.0])
    else:
        mid = total - low - high
        ratios = np.array([low, mid, high]) / total
    return SpectralProfile(bins, ratios)
