"""Quantitative explanation-vs-mask alignment: thresholding, IoU, rates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from ..maps import Heatmap, minmax_heatmap

DEFAULT_TOP_FRACTION = 0.2
DEFAULT_IOU_CUTOFF = 0.3


def fuse_heatmaps(cam: Heatmap, forensic: Heatmap) -> Heatmap:
    """Pixelwise maximum of the two explanation maps, renormalized."""
    if cam.shape != forensic.shape:
        raise ShapeError(f"heatmap dims differ: {cam.shape} vs {forensic.shape}")
    fused = np.maximum(cam.values, forensic.values)
    out = minmax_heatmap(fused, source="fused")
    return out


def threshold_top_fraction(
    heatmap: Heatmap, fraction: float = DEFAULT_TOP_FRACTION
) -> tuple[np.ndarray, bool]:
    """Mask of the top-activation pixels: everything at or above the
    (1 - fraction) quantile, ties included. Returns (mask, flat_flag)."""
    if heatmap.flat:
        return np.zeros(heatmap.shape, dtype=bool), True
    v = heatmap.values
    if v.max() - v.min() < 1e-12:
        return np.zeros(heatmap.shape, dtype=bool), True
    k = int(np.ceil(fraction * v.size))
    cutoff = np.partition(v.ravel(), v.size - k)[v.size - k]
    return v >= cutoff, False


def iou(h: np.ndarray, m: np.ndarray) -> float:
    """Intersection over union of two boolean masks; empty union -> 0."""
    h = np.asarray(h, dtype=bool)
    m = np.asarray(m, dtype=bool)
    if h.shape != m.shape:
        raise ShapeError(f"mask dims differ: {h.shape} vs {m.shape}")
    union = np.logical_or(h, m).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(h, m).sum() / union)


@dataclass
class AlignmentSample:
    cam: Heatmap
    forensic: Heatmap
    mask: np.ndarray
    correctly_classified_fake: bool


@dataclass
class AlignmentEntry:
    iou_cam: float
    iou_forensic: float
    aligned: bool


@dataclass
class AlignmentReport:
    entries: list[AlignmentEntry]
    rate: float | None  # None when no qualifying samples
    qualifying: int
    threshold_fraction: float = DEFAULT_TOP_FRACTION
    iou_cutoff: float = DEFAULT_IOU_CUTOFF

    def to_dict(self) -> dict:
        return {
            "alignment_rate": self.rate,
            "qualifying_samples": self.qualifying,
            "threshold_fraction": self.threshold_fraction,
            "iou_cutoff": self.iou_cutoff,
            "samples": [
                {"iou_cam": e.iou_cam, "iou_forensic": e.iou_forensic, "aligned": e.aligned}
                for e in self.entries
            ],
        }


def alignment_rate(
    samples: list[AlignmentSample],
    fraction: float = DEFAULT_TOP_FRACTION,
    cutoff: float = DEFAULT_IOU_CUTOFF,
) -> AlignmentReport:
    """Fraction of correctly classified fakes where either explanation map
    overlaps the ground-truth mask with IoU >= cutoff."""
    entries = []
    aligned_count = 0
    qualifying = 0
    for s in samples:
        if not s.correctly_classified_fake:
            continue
        qualifying += 1
        hc, _ = threshold_top_fraction(s.cam, fraction)
        hf, _ = threshold_top_fraction(s.forensic, fraction)
        ic = iou(hc, s.mask)
        if_ = iou(hf, s.mask)
        ok = max(ic, if_) >= cutoff
        aligned_count += ok
        entries.append(AlignmentEntry(iou_cam=ic, iou_forensic=if_, aligned=bool(ok)))
    rate = aligned_count / qualifying if qualifying else None
    return AlignmentReport(
        entries=entries, rate=rate, qualifying=qualifying,
        threshold_fraction=fraction, iou_cutoff=cutoff,
    )
