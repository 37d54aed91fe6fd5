from __future__ import annotations

import math

import numpy as np
import pytest

from shanshui.canny import (
    CannyParams,
    canny,
    gaussian_blur,
    gaussian_kernel,
    hysteresis_threshold,
    non_max_suppression,
    sobel_gradients,
)
from shanshui.errors import DomainError
from shanshui.raster import CropSpec, Raster

from canny_oracle import oracle_blur, oracle_canny, oracle_hysteresis, oracle_nms, oracle_sobel

DEFAULTS = CannyParams()


def gray(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


class TestGaussianKernel:
    @pytest.mark.parametrize("sigma,radius", [(0.5, 1), (1.0, 2), (1.4, 2), (3.0, 7)])
    def test_normalized_and_symmetric(self, sigma, radius):
        w = gaussian_kernel(sigma, radius)
        assert len(w) == 2 * radius + 1
        assert abs(w.sum() - 1.0) <= 1e-9
        assert np.array_equal(w, w[::-1])

    def test_center_weight_matches_direct_evaluation(self):
        # Independent evaluation of the normalized Gaussian.
        raw = [math.exp(-(x * x) / 2.0) for x in (-2, -1, 0, 1, 2)]
        expected_center = raw[2] / sum(raw)
        w = gaussian_kernel(1.0, 2)
        assert w[2] == pytest.approx(expected_center, abs=1e-12)
        assert round(w[2], 4) == 0.4026

    def test_rejects_bad_params(self):
        with pytest.raises(DomainError):
            gaussian_kernel(0.0, 2)
        with pytest.raises(DomainError):
            gaussian_kernel(1.0, 0)


class TestGaussianBlur:
    def test_constant_image_stays_constant(self):
        img = np.full((9, 7), 42.0)
        out = gaussian_blur(img, DEFAULTS)
        assert out.shape == img.shape
        assert np.allclose(out, 42.0, rtol=0, atol=1e-9)

    def test_impulse_center_is_squared_center_weight(self):
        img = np.zeros((5, 5))
        img[2, 2] = 1.0
        params = CannyParams(sigma=1.0, radius=2)
        out = gaussian_blur(img, params)
        w = gaussian_kernel(1.0, 2)
        assert out[2, 2] == w[2] * w[2]
        expected = oracle_blur(img, w)
        assert np.array_equal(out, expected)

    def test_matches_direct_convolution_oracle(self):
        rng = np.random.default_rng(7)
        img = rng.integers(0, 256, size=(12, 10)).astype(np.float64)
        w = gaussian_kernel(1.4, 2)
        assert np.array_equal(gaussian_blur(img, DEFAULTS), oracle_blur(img, w))


class TestSobel:
    def test_constant_image_has_zero_gradients(self):
        gx, gy = sobel_gradients(np.full((6, 6), 13.0))
        assert not gx.any() and not gy.any()

    def test_horizontal_ramp(self):
        img = np.tile(np.arange(5, dtype=np.float64), (5, 1))
        gx, gy = sobel_gradients(img)
        egx, egy = oracle_sobel(img)
        assert np.array_equal(gx, egx)
        assert np.array_equal(gy, egy)
        # Interior of I(x, y) = x: gx is the full kernel weight sum, gy vanishes.
        assert (gx[1:-1, 1:-1] == 8.0).all()
        assert (gy[1:-1, 1:-1] == 0.0).all()

    def test_transpose_swaps_gradients(self):
        rng = np.random.default_rng(3)
        img = rng.random((7, 5)) * 255
        gx, gy = sobel_gradients(img)
        gxt, gyt = sobel_gradients(img.T.copy())
        # Equal up to summation order of the transposed taps.
        np.testing.assert_allclose(gxt, gy.T, rtol=1e-12, atol=0)
        np.testing.assert_allclose(gyt, gx.T, rtol=1e-12, atol=0)

    def test_too_small_raises(self):
        with pytest.raises(DomainError):
            sobel_gradients(np.zeros((2, 5)))


class TestNonMaxSuppression:
    def test_constant_magnitude_interior_retained(self):
        gx = np.full((5, 5), 3.0)
        gy = np.zeros((5, 5))
        out = non_max_suppression(gx, gy)
        assert (out[1:-1, 1:-1] == 3.0).all()
        assert not out[0].any() and not out[-1].any()
        assert not out[:, 0].any() and not out[:, -1].any()

    def test_horizontal_line_of_magnitudes(self):
        # Magnitudes [1, 3, 2] across the interior row, gradient pointing
        # along +x: only the local maximum survives.
        gx = gray([[0, 1, 3, 2, 0]] * 3)
        gy = np.zeros((3, 5))
        out = non_max_suppression(gx, gy)
        assert np.array_equal(out, oracle_nms(gx, gy))
        assert out[1, 2] == 3.0
        assert out[1, 1] == 0.0 and out[1, 3] == 0.0

    def test_zero_gradients_zero_output(self):
        out = non_max_suppression(np.zeros((4, 4)), np.zeros((4, 4)))
        assert not out.any()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            non_max_suppression(np.zeros((3, 3)), np.zeros((3, 4)))


class TestHysteresis:
    def test_isolated_weak_pixel_dropped(self):
        mag = np.zeros((5, 5))
        mag[2, 2] = 50.0
        out = hysteresis_threshold(mag, DEFAULTS)
        assert not out.any()

    def test_strong_pixel_always_kept(self):
        mag = np.zeros((5, 5))
        mag[2, 2] = 100.0
        out = hysteresis_threshold(mag, DEFAULTS)
        assert out[2, 2] == 1 and out.sum() == 1

    def test_weak_chain_promoted_by_single_strong(self):
        mag = np.zeros((5, 5))
        mag[2, 0] = 150.0
        mag[2, 1] = 50.0
        mag[2, 2] = 50.0
        mag[2, 3] = 50.0
        out = hysteresis_threshold(mag, DEFAULTS)
        assert np.array_equal(out, oracle_hysteresis(mag, 40.0, 100.0))
        assert (out[2, :4] == 1).all() and out.sum() == 4

    def test_values_are_binary(self):
        rng = np.random.default_rng(5)
        mag = rng.random((8, 8)) * 200
        out = hysteresis_threshold(mag, DEFAULTS)
        assert set(np.unique(out)) <= {0, 1}


class TestCannyPipeline:
    def test_constant_image_has_no_edges(self):
        img = Raster(np.full((20, 20, 3), 128, dtype=np.uint8))
        out = canny(img, CropSpec.none(), DEFAULTS)
        assert out.shape == (20, 20)
        assert not out.any()

    def test_vertical_step_edges(self):
        data = np.zeros((16, 16, 3), dtype=np.uint8)
        data[:, 8:] = 255
        out = canny(Raster(data), CropSpec.none(), DEFAULTS)
        expected = oracle_canny(data, gaussian_kernel(1.4, 2), 40.0, 100.0)
        assert np.array_equal(out, expected)
        cols = sorted(set(np.nonzero(out)[1].tolist()))
        assert 1 <= len(cols) <= 2
        assert cols == list(range(cols[0], cols[0] + len(cols)))
        assert all(6 <= c <= 9 for c in cols)
        # Every interior row crosses the step.
        assert all(out[y, cols].any() for y in range(1, 15))

    def test_output_dims_follow_crop(self):
        img = Raster(np.random.default_rng(0).integers(0, 256, (40, 50, 3)).astype(np.uint8))
        out = canny(img, CropSpec(0.1, 0.1, 0.1, 0.1), DEFAULTS)
        assert out.shape == (32, 40)

    def test_brightness_shift_invariance(self):
        rng = np.random.default_rng(11)
        base = rng.integers(60, 180, size=(16, 16, 3)).astype(np.uint8)
        img = Raster(base)
        shifted = Raster((base + 40).astype(np.uint8))
        assert np.array_equal(
            canny(img, CropSpec.none(), DEFAULTS), canny(shifted, CropSpec.none(), DEFAULTS)
        )

    def test_edge_pixels_exceed_low_threshold(self):
        rng = np.random.default_rng(2)
        data = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
        img = Raster(data)
        from shanshui.raster import crop_frame, to_grayscale

        suppressed = non_max_suppression(
            *sobel_gradients(gaussian_blur(to_grayscale(img), DEFAULTS))
        )
        out = canny(img, CropSpec.none(), DEFAULTS)
        assert set(np.unique(out)) <= {0, 1}
        assert (suppressed[out == 1] >= DEFAULTS.low_threshold).all()


class TestOracleEquivalence:
    def test_staged_pipeline_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(123)
        weights = gaussian_kernel(DEFAULTS.sigma, DEFAULTS.radius)
        for trial in range(50):
            data = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
            staged = canny(Raster(data), CropSpec.none(), DEFAULTS)
            brute = oracle_canny(data, weights, DEFAULTS.low_threshold, DEFAULTS.high_threshold)
            assert np.array_equal(staged, brute), f"trial {trial} diverged"
