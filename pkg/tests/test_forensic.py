"""Forensic descriptors: residuals, blockiness, spectra, the 83-dim vector."""

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from fakefuse.errors import ShapeError
from fakefuse.forensic import (
    FEATURE_NAMES,
    FORENSIC_DIM,
    blockiness_map,
    blockiness_profile,
    dct2_full,
    forensic_heatmap,
    forensic_vector,
    idct2_full,
    jpeg_feature_vector,
    noise_residual,
    radial_profile,
    residual_stats,
)
from fakefuse.media import Frame, JpegConfig, jpeg_round_trip, quality_table


class TestNoiseResidual:
    def test_constant_image_zero_residual(self):
        r = noise_residual(np.full((16, 16), 0.3))
        np.testing.assert_allclose(r.values, 0.0, atol=1e-15)

    def test_invariant_to_constant_offset(self):
        rng = np.random.default_rng(0)
        img = rng.random((12, 12)) * 0.5
        r1 = noise_residual(img).values
        r2 = noise_residual(img + 0.25).values
        np.testing.assert_allclose(r1, r2, atol=1e-12)

    def test_impulse_gives_negated_kernel(self):
        img = np.zeros((11, 11))
        img[5, 5] = 1.0
        r = noise_residual(img).values
        # direct convolution oracle: blur of an interior impulse is the kernel
        ax = np.arange(5.0) - 2.0
        g1 = np.exp(-(ax**2) / 2.0)
        g1 /= g1.sum()
        kern = np.outer(g1, g1)
        expected = img.copy()
        expected[3:8, 3:8] -= kern
        np.testing.assert_allclose(r, expected, atol=1e-12)

    def test_translation_equivariance_interior(self):
        rng = np.random.default_rng(1)
        img = rng.random((20, 20))
        shifted = np.roll(img, (2, 3), axis=(0, 1))
        r1 = np.roll(noise_residual(img).values, (2, 3), axis=(0, 1))
        r2 = noise_residual(shifted).values
        np.testing.assert_array_equal(r1[6:-6, 6:-6], r2[6:-6, 6:-6])

    def test_too_small_rejected(self):
        with pytest.raises(ShapeError):
            noise_residual(np.zeros((4, 8)))


class TestResidualStats:
    def test_zero_residual_all_zero(self):
        r = noise_residual(np.full((32, 32), 0.5))
        np.testing.assert_allclose(residual_stats(r), np.zeros(8), atol=1e-12)

    def test_outlier_block_detected(self):
        rng = np.random.default_rng(2)
        img = np.zeros((64, 64))
        img += rng.normal(0, 0.001, size=img.shape)  # faint uniform noise
        img[0:32, 0:32] += rng.normal(0, 0.2, size=(32, 32))  # one loud block
        from fakefuse.forensic.residual import ResidualMap

        stats = residual_stats(ResidualMap(img))
        block_std_mean, block_std_max = stats[2], stats[4]
        assert block_std_max > 10 * block_std_mean / 4
        assert stats[7] > 0  # outlier fraction

    def test_scaling_homogeneity(self):
        rng = np.random.default_rng(3)
        from fakefuse.forensic.residual import ResidualMap

        vals = rng.normal(size=(40, 40))
        s1 = residual_stats(ResidualMap(vals))
        s2 = residual_stats(ResidualMap(2.0 * vals))
        assert s2[0] == pytest.approx(2.0 * s1[0])
        assert s2[1] == pytest.approx(2.0 * s1[1])


class TestBlockiness:
    def test_linear_ramp_is_zero(self):
        y, x = np.mgrid[0:48, 0:48]
        ramp = (x + 2.0 * y) / 200.0
        prof = blockiness_profile(ramp)
        assert abs(prof["global"]) <= 1e-9

    def test_block_constant_image(self):
        rng = np.random.default_rng(4)
        vals = rng.random((6, 6))
        img = np.kron(vals, np.ones((8, 8)))
        bmap = blockiness_map(img)
        assert bmap.global_score > 0
        assert bmap.grid_offset == (0, 0)

    def test_jpeg_increases_blockiness_on_noise(self):
        # moderate-amplitude noise: quantization flattens in-block detail and
        # leaves boundary discontinuities (full-range white noise drowns them)
        wins = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            gray = np.clip(0.5 + 0.05 * rng.standard_normal((64, 64)), 0.0, 1.0)
            frame = Frame(gray[:, :, None])
            before = blockiness_profile(frame.pixels[:, :, 0])["global"]
            after_frame = jpeg_round_trip(frame, JpegConfig(50))
            after = blockiness_profile(after_frame.pixels[:, :, 0])["global"]
            wins += after > before
        assert wins >= 19  # 95% of seeds


class TestJpegFeatures:
    def test_uncompressed_noise(self):
        rng = np.random.default_rng(5)
        feats = jpeg_feature_vector(rng.random((64, 64)))
        steps = feats[3:6]
        np.testing.assert_array_equal(steps, [1.0, 1.0, 1.0])
        assert feats[6] < 0.05  # near-zero AC fraction stays low

    def test_recovers_table_entry_after_compression(self):
        rng = np.random.default_rng(6)
        frame = Frame(0.25 + 0.5 * rng.random((64, 64, 1)))
        out = jpeg_round_trip(frame, JpegConfig(50))
        feats = jpeg_feature_vector(out.pixels[:, :, 0])
        table = quality_table(JpegConfig(50))
        assert abs(feats[3] - table[0, 1]) <= 1
        assert abs(feats[4] - table[1, 0]) <= 1
        assert abs(feats[5] - table[1, 1]) <= 1

    def test_offset_contrast_at_least_one(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            feats = jpeg_feature_vector(rng.random((32, 32)))
            assert feats[2] >= 1.0
        flat = jpeg_feature_vector(np.full((32, 32), 0.5))
        assert flat[2] >= 1.0


class TestDct:
    def test_constant_image_dc_only(self):
        n, c = 16, 0.37
        coeffs = dct2_full(np.full((n, n), c))
        assert coeffs[0, 0] == pytest.approx(c * n)
        rest = coeffs.copy()
        rest[0, 0] = 0.0
        np.testing.assert_allclose(rest, 0.0, atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            x = rng.normal(size=(24, 24))
            c = dct2_full(x)
            assert (x**2).sum() == pytest.approx((c**2).sum(), rel=1e-9)

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(20, 20))
        np.testing.assert_allclose(idct2_full(dct2_full(x)), x, atol=1e-10)

    def test_non_square_rejected(self):
        with pytest.raises(ShapeError):
            dct2_full(np.zeros((8, 16)))


class TestRadialProfile:
    def test_dc_only_energy(self):
        coeffs = np.zeros((32, 32))
        coeffs[0, 0] = 5.0
        p = radial_profile(coeffs)
        assert p.radial_bins[0] > 0
        np.testing.assert_allclose(p.radial_bins[1:], 0.0)
        np.testing.assert_allclose(p.band_ratios, [1.0, 0.0, 0.0])

    def test_mid_band_ring(self):
        n = 64
        coeffs = np.zeros((n, n))
        u, v = np.mgrid[0:n, 0:n]
        r = np.sqrt(u**2 + v**2) / (np.sqrt(2.0) * (n - 1))
        ring = np.abs(r - 0.5) < 0.01
        coeffs[ring] = 3.0
        p = radial_profile(coeffs)
        assert p.band_ratios[1] == pytest.approx(1.0)
        assert int(np.argmax(p.radial_bins)) == pytest.approx(32, abs=2)

    def test_band_ratios_sum_to_one(self):
        rng = np.random.default_rng(10)
        p = radial_profile(rng.normal(size=(48, 48)))
        assert p.band_ratios.sum() == pytest.approx(1.0, abs=1e-9)

    def test_blur_lowers_high_band(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            noise = np.random.default_rng(seed).random((64, 64))
            sharp = radial_profile(dct2_full(noise)).band_ratios[2]
            soft = radial_profile(dct2_full(gaussian_filter(noise, 2.0))).band_ratios[2]
            assert soft < sharp


class TestForensicVector:
    def test_length_and_names(self):
        rng = np.random.default_rng(12)
        vec = forensic_vector(Frame(rng.random((64, 64, 3))))
        assert vec.shape == (FORENSIC_DIM,) == (83,)
        assert len(FEATURE_NAMES) == 83
        assert np.all(np.isfinite(vec))

    def test_deterministic(self):
        rng = np.random.default_rng(13)
        f = Frame(rng.random((64, 64, 3)))
        np.testing.assert_array_equal(forensic_vector(f), forensic_vector(f))


class TestForensicHeatmap:
    def test_constant_image_flagged_flat(self):
        h = forensic_heatmap(Frame(np.full((32, 32, 1), 0.6)))
        assert h.flat
        np.testing.assert_array_equal(h.values, 0.0)

    def test_range_and_max(self):
        rng = np.random.default_rng(14)
        h = forensic_heatmap(Frame(rng.random((48, 48, 3))))
        assert not h.flat
        assert h.values.min() >= 0.0
        assert h.values.max() == pytest.approx(1.0)
