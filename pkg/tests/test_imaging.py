import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mirror_convolve_2d
from polypdet.errors import DimensionError, ParameterError
from polypdet.imaging import (
    CircularMask,
    apply_mask,
    frobenius_distance,
    gaussian_convolve,
    gaussian_kernel,
    positive_part,
    to_grayscale,
)


class TestGrayscale:
    def test_gray_of_gray(self):
        rgb = np.full((16, 16, 3), 100.0)
        assert np.allclose(to_grayscale(rgb), 100.0)

    def test_pure_red(self):
        rgb = np.zeros((16, 16, 3))
        rgb[..., 0] = 255.0
        assert np.allclose(to_grayscale(rgb), 76.245)

    def test_black(self):
        assert np.all(to_grayscale(np.zeros((16, 16, 3))) == 0.0)

    def test_bad_shape(self):
        with pytest.raises(DimensionError):
            to_grayscale(np.zeros((16, 16, 4)))


class TestKernel:
    def test_stencil_length_and_normalization(self):
        for sigma in (1, 2.5, 7, 30):
            taps = gaussian_kernel(sigma)
            assert len(taps) == 2 * int(np.ceil(sigma)) + 1
            assert abs(taps.sum() - 1.0) < 1e-12
            assert np.all(taps > 0)
            assert np.allclose(taps, taps[::-1])

    def test_sigma_one_taps(self):
        taps = gaussian_kernel(1)
        expected = np.exp(-np.array([1.0, 0.0, 1.0]) / 2)
        expected /= expected.sum()
        assert np.allclose(taps, [0.2741, 0.4519, 0.2741], atol=5e-5)
        assert np.allclose(taps, expected)

    def test_sigma_below_one_rejected(self):
        with pytest.raises(ParameterError):
            gaussian_kernel(0.5)


class TestConvolve:
    def test_constant_preserved(self):
        f = np.full((32, 32), 42.0)
        assert np.allclose(gaussian_convolve(f, 3), 42.0, atol=1e-12)

    def test_matches_brute_force_oracle(self, rng):
        f = rng.uniform(0, 255, (64, 64))
        for sigma in (1, 3, 7, 11):
            expected = mirror_convolve_2d(f, gaussian_kernel(sigma))
            got = gaussian_convolve(f, sigma)
            assert np.max(np.abs(got - expected)) <= 1e-9

    def test_centered_impulse(self):
        f = np.zeros((33, 33))
        f[16, 16] = 1.0
        out = gaussian_convolve(f, 1)
        taps = gaussian_kernel(1)
        assert np.allclose(out[15:18, 15:18], np.outer(taps, taps), atol=1e-12)

    def test_linearity(self, rng):
        a = rng.uniform(0, 255, (32, 32))
        b = rng.uniform(0, 255, (32, 32))
        lhs = gaussian_convolve(2.5 * a - 1.25 * b, 3)
        rhs = 2.5 * gaussian_convolve(a, 3) - 1.25 * gaussian_convolve(b, 3)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9

    def test_sigma_below_one_rejected(self):
        with pytest.raises(ParameterError):
            gaussian_convolve(np.zeros((16, 16)), 0.9)


class TestPositivePart:
    @pytest.mark.parametrize("value,expected", [(-0.3, 0.0), (0.0, 0.0), (0.5, 0.5)])
    def test_values(self, value, expected):
        out = positive_part(np.full((8, 8), value))
        assert np.all(out == expected)

    def test_idempotent_and_nonnegative(self, rng):
        w = rng.normal(size=(32, 32))
        once = positive_part(w)
        assert np.all(once >= 0)
        assert np.array_equal(positive_part(once), once)


class TestMask:
    def test_center_unchanged_corner_filled(self):
        f = np.arange(64 * 64, dtype=float).reshape(64, 64)
        mask = CircularMask.for_shape(f.shape)
        out = apply_mask(f, mask, fill=7.0)
        assert out[32, 32] == f[32, 32]
        assert out[0, 0] == 7.0

    def test_idempotent(self, rng):
        f = rng.uniform(0, 255, (32, 32))
        mask = CircularMask.for_shape(f.shape)
        once = apply_mask(f, mask, 0.0)
        assert np.array_equal(apply_mask(once, mask, 0.0), once)

    def test_radius_validation(self):
        with pytest.raises(ParameterError):
            CircularMask.for_shape((32, 32), radius=20)


class TestFrobenius:
    def test_identical_frames(self, mask64):
        f = np.ones((64, 64))
        assert frobenius_distance(f, f, mask64) == 0.0

    def test_single_pixel(self, mask64):
        a = np.zeros((64, 64))
        b = a.copy()
        b[32, 32] = 3.0
        assert frobenius_distance(a, b, mask64) == 3.0

    def test_four_pixels(self, mask64):
        a = np.zeros((64, 64))
        b = a.copy()
        b[30:32, 30:32] = 1.0
        assert abs(frobenius_distance(a, b, mask64) - 2.0) < 1e-12

    def test_outside_ignored(self, mask64):
        a = np.zeros((64, 64))
        b = a.copy()
        b[0, 0] = 100.0
        assert frobenius_distance(a, b, mask64) == 0.0

    def test_dimension_mismatch(self, mask64):
        with pytest.raises(DimensionError):
            frobenius_distance(np.zeros((64, 64)), np.zeros((64, 32)), mask64)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_triangle_inequality(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = r.uniform(-50, 50, (3, 32, 32))
        mask = CircularMask.for_shape((32, 32))
        assert frobenius_distance(a, c, mask) <= (
            frobenius_distance(a, b, mask) + frobenius_distance(b, c, mask) + 1e-9
        )
