"""Frame sampling, alignment, resizing and JPEG artifact simulation."""

from .align import AlignSpec, align_crop, bilinear_resize, estimate_similarity, resize_normalize
from .frame import (
    LUMA_WEIGHTS,
    ClipSpec,
    Frame,
    decode_image,
    encode_image,
    frame_from_array,
    quantize_to_8bit,
    sample_frames,
    to_gray,
)
from .jpeg import BASE_LUMA_TABLE, JpegConfig, jpeg_round_trip, quality_table

__all__ = [
    "Frame",
    "ClipSpec",
    "AlignSpec",
    "JpegConfig",
    "LUMA_WEIGHTS",
    "BASE_LUMA_TABLE",
    "frame_from_array",
    "quantize_to_8bit",
    "to_gray",
    "decode_image",
    "encode_image",
    "sample_frames",
    "align_crop",
    "resize_normalize",
    "bilinear_resize",
    "estimate_similarity",
    "jpeg_round_trip",
    "quality_table",
]
