"""Handcrafted forensic descriptors and the forensic heatmap."""

from .blockiness import BlockinessMap, blockiness_map, blockiness_profile, estimate_quant_step, jpeg_feature_vector
from .residual import ResidualMap, noise_residual, residual_stats
from .spectral import SpectralProfile, block_dct_coeffs, dct2_full, idct2_full, radial_profile
from .vector import FEATURE_NAMES, FORENSIC_DIM, forensic_heatmap, forensic_vector

__all__ = [
    "ResidualMap",
    "BlockinessMap",
    "SpectralProfile",
    "noise_residual",
    "residual_stats",
    "blockiness_map",
    "blockiness_profile",
    "estimate_quant_step",
    "jpeg_feature_vector",
    "dct2_full",
    "idct2_full",
    "block_dct_coeffs",
    "radial_profile",
    "forensic_vector",
    "forensic_heatmap",
    "FEATURE_NAMES",
    "FORENSIC_DIM",
]
