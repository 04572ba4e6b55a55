"""Crop/alignment and bilinear resizing.

Landmark alignment estimates a similarity transform onto a canonical
5-point template (eyes, nose tip, mouth corners); bbox mode crops and pads
to square; center mode takes the largest centered square.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AlignmentError, ParameterError
from .frame import Frame, frame_from_array

# canonical 5-point layout on a 112 px face chip (widely used alignment target)
_TEMPLATE_112 = np.array(
    [
        [38.2946, 51.6963],
        [73.5318, 51.5014],
        [56.0252, 71.7366],
        [41.5493, 92.3655],
        [70.7299, 92.2041],
    ]
)


@dataclass
class AlignSpec:
    mode: str = "center"  # landmarks | bbox | center
    landmarks: np.ndarray | None = None  # (5, 2) x,y pixel coords
    bbox: tuple | None = None  # (x0, y0, x1, y1)
    output_size: int = 224

    def __post_init__(self):
        if self.mode not in ("landmarks", "bbox", "center"):
            raise ParameterError(f"unknown align mode {self.mode!r}")
        if self.output_size < 8:
            raise ParameterError("output_size must be >= 8")
        if self.landmarks is not None:
            self.landmarks = np.asarray(self.landmarks, dtype=np.float64)
            if self.landmarks.shape != (5, 2):
                raise ParameterError("landmarks must be five (x, y) pairs")


def bilinear_resize(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear resampling; identity when sizes match."""
    h, w = pixels.shape[:2]
    if (h, w) == (out_h, out_w):
        return pixels.copy()
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    p00 = pixels[y0][:, x0]
    p01 = pixels[y0][:, x1]
    p10 = pixels[y1][:, x0]
    p11 = pixels[y1][:, x1]
    top = p00 * (1 - fx) + p01 * fx
    bot = p10 * (1 - fx) + p11 * fx
    return top * (1 - fy) + bot * fy


def resize_normalize(frame: Frame, size: int) -> Frame:
    """Bilinear resize to size x size with output clamped to [0, 1]."""
    if size < 8:
        raise ParameterError("target size must be >= 8")
    out = bilinear_resize(frame.pixels, size, size)
    return frame_from_array(out, frame.source_timestamp_s)


def estimate_similarity(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares similarity transform (scale, rotation, translation).

    Returns a 2x3 matrix M with dst ~ M @ [x, y, 1]. Raises AlignmentError
    when the source points are coincident or collinear.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    sc = src - mu_s
    dc = dst - mu_d
    var_s = (sc**2).sum() / len(src)
    if var_s < 1e-12:
        raise AlignmentError("landmarks are coincident")
    cov = dc.T @ sc / len(src)
    u, s, vt = np.linalg.svd(cov)
    if s[1] / max(s[0], 1e-300) < 1e-9:
        raise AlignmentError("landmarks are collinear")
    d = np.sign(np.linalg.det(u @ vt))
    diag = np.diag([1.0, d])
    r = u @ diag @ vt
    scale = (s * np.diag(diag)).sum() / var_s
    t = mu_d - scale * r @ mu_s
    m = np.zeros((2, 3))
    m[:, :2] = scale * r
    m[:, 2] = t
    return m


def warp_affine(pixels: np.ndarray, m: np.ndarray, out_size: int) -> np.ndarray:
    """Inverse-map bilinear warp of a forward 2x3 transform."""
    a = m[:, :2]
    t = m[:, 2]
    inv = np.linalg.inv(a)
    ys, xs = np.mgrid[0:out_size, 0:out_size]
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1).astype(np.float64) - t
    src = pts @ inv.T  # (N, 2) x,y in source coords
    h, w = pixels.shape[:2]
    sx = np.clip(src[:, 0], 0.0, w - 1.0)
    sy = np.clip(src[:, 1], 0.0, h - 1.0)
    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[:, None]
    fy = (sy - y0)[:, None]
    p00 = pixels[y0, x0]
    p01 = pixels[y0, x1]
    p10 = pixels[y1, x0]
    p11 = pixels[y1, x1]
    vals = (p00 * (1 - fx) + p01 * fx) * (1 - fy) + (p10 * (1 - fx) + p11 * fx) * fy
    return vals.reshape(out_size, out_size, pixels.shape[2])


def _pad_to_square(pixels: np.ndarray) -> np.ndarray:
    h, w = pixels.shape[:2]
    if h == w:
        return pixels
    if h < w:
        top = (w - h) // 2
        return np.pad(pixels, ((top, w - h - top), (0, 0), (0, 0)), mode="edge")
    left = (h - w) // 2
    return np.pad(pixels, ((0, 0), (left, h - w - left), (0, 0)), mode="edge")


def align_crop(frame: Frame, spec: AlignSpec) -> Frame:
    """Square, aligned crop at spec.output_size."""
    size = spec.output_size
    px = frame.pixels
    if spec.mode == "landmarks":
        if spec.landmarks is None:
            raise ParameterError("landmarks mode needs landmark coordinates")
        template = _TEMPLATE_112 * (size / 112.0)
        m = estimate_similarity(spec.landmarks, template)
        out = warp_affine(px, m, size)
        return frame_from_array(out, frame.source_timestamp_s)
    if spec.mode == "bbox":
        if spec.bbox is None:
            raise ParameterError("bbox mode needs box coordinates")
        x0, y0, x1, y1 = (int(round(v)) for v in spec.bbox)
        x0 = max(0, x0)
        y0 = max(0, y0)
        x1 = min(frame.width, x1)
        y1 = min(frame.height, y1)
        if x1 - x0 < 2 or y1 - y0 < 2:
            raise ParameterError(f"degenerate bbox {spec.bbox}")
        crop = _pad_to_square(px[y0:y1, x0:x1])
        return frame_from_array(
            bilinear_resize(crop, size, size), frame.source_timestamp_s
        )
    # center mode
    side = min(frame.height, frame.width)
    top = (frame.height - side) // 2
    left = (frame.width - side) // 2
    crop = px[top : top + side, left : left + side]
    return frame_from_array(bilinear_resize(crop, size, size), frame.source_timestamp_s)
