import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import flood_fill_components, smooth_positive_frame
from polypdet.errors import ParameterError
from polypdet.imaging import CircularMask
from polypdet.midpass import (
    binary_segment,
    connected_components,
    midpass_filter,
    segmentation_threshold,
)


class TestMidpass:
    def test_constant_frame_is_zero(self, mask64):
        u = midpass_filter(np.full((64, 64), 120.0), 7, 30, mask64)
        assert np.allclose(u, 0.0, atol=1e-12)

    def test_scale_invariance(self, mask64, rng):
        f = smooth_positive_frame(rng)
        u1 = midpass_filter(f, 7, 30, mask64)
        u2 = midpass_filter(2.0 * f, 7, 30, mask64)
        assert np.max(np.abs(u1 - u2)) <= 1e-9

    def test_nonnegative_and_masked(self, mask64, rng):
        f = smooth_positive_frame(rng)
        u = midpass_filter(f, 7, 30, mask64)
        assert np.all(u >= 0)
        assert np.all(u[~mask64.inside(f.shape)] == 0)

    def test_responds_to_bump(self, mask64):
        f = np.full((64, 64), 80.0)
        yy, xx = np.indices((64, 64))
        f += 60.0 * np.exp(-((yy - 31) ** 2 + (xx - 31) ** 2) / (2 * 6.0**2))
        u = midpass_filter(f, 7, 30, mask64)
        assert u.max() > 0.05

    def test_sigma_order_enforced(self, mask64):
        f = np.full((64, 64), 1.0)
        with pytest.raises(ParameterError):
            midpass_filter(f, 30, 7, mask64)
        with pytest.raises(ParameterError):
            midpass_filter(f, 0.5, 30, mask64)


class TestThreshold:
    def test_clamped_low(self):
        u = np.full((8, 8), 0.1)  # half max 0.05 < 0.11
        assert segmentation_threshold(u, 0.11, 0.16) == 0.11

    def test_clamped_high(self):
        u = np.full((8, 8), 1.0)  # half max 0.5 > 0.16
        assert segmentation_threshold(u, 0.11, 0.16) == 0.16

    def test_half_max_inside_band(self):
        u = np.zeros((8, 8))
        u[4, 4] = 0.28
        assert np.isclose(segmentation_threshold(u, 0.11, 0.16), 0.14)

    def test_band_validation(self):
        with pytest.raises(ParameterError):
            segmentation_threshold(np.zeros((8, 8)), 0.16, 0.11)
        with pytest.raises(ParameterError):
            segmentation_threshold(np.zeros((8, 8)), 0.0, 0.16)


class TestSegment:
    def test_threshold_inclusive(self):
        u = np.array([[0.10, 0.11], [0.12, 0.0]])
        s = binary_segment(u, 0.11)
        assert s.tolist() == [[0, 1], [1, 0]]

    def test_positive_theta_required(self):
        with pytest.raises(ParameterError):
            binary_segment(np.zeros((4, 4)), 0.0)


class TestComponents:
    def test_empty(self):
        assert connected_components(np.zeros((16, 16), dtype=np.uint8)) == []

    def test_diagonal_connectivity(self):
        s = np.zeros((8, 8), dtype=np.uint8)
        s[1, 1] = s[2, 2] = s[3, 3] = 1
        comps = connected_components(s)
        assert len(comps) == 1
        assert len(comps[0][0]) == 3

    def test_two_separate_blocks_row_major_order(self):
        s = np.zeros((16, 16), dtype=np.uint8)
        s[10:12, 1:3] = 1  # second in row-major order
        s[2:4, 8:10] = 1  # first in row-major order
        comps = connected_components(s)
        assert len(comps) == 2
        assert comps[0][0].min() == 2
        assert comps[1][0].min() == 10

    def test_matches_flood_fill_oracle(self, rng):
        for _ in range(20):
            s = (rng.random((48, 48)) < 0.35).astype(np.uint8)
            got = connected_components(s)
            expected = flood_fill_components(s)
            assert len(got) == len(expected)
            for (rows, cols), exp in zip(got, expected):
                assert frozenset(zip(rows.tolist(), cols.tolist())) == exp

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.9))
    def test_partition_property(self, seed, density):
        s = (np.random.default_rng(seed).random((24, 24)) < density).astype(np.uint8)
        comps = connected_components(s)
        covered = set()
        for rows, cols in comps:
            pix = set(zip(rows.tolist(), cols.tolist()))
            assert not (pix & covered)
            covered |= pix
        assert len(covered) == int(s.sum())
