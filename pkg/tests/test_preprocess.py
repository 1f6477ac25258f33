import numpy as np
import pytest

from conftest import smooth_positive_frame
from polypdet.imaging import CircularMask, coordinate_grids
from polypdet.preprocess import (
    RadialGainModel,
    correct_vignetting,
    extrapolate_radial,
    fit_radial_gain,
    upwind_residual,
)


def vignetted(shape, mask, coeffs, base=140.0):
    yy, xx = coordinate_grids(shape)
    rho = np.hypot(yy - mask.center_y, xx - mask.center_x) / mask.radius
    gain = RadialGainModel(*coeffs).gain(rho)
    return base * gain


class TestGainFit:
    def test_recovers_synthetic_gain(self, mask64):
        coeffs = (-0.35, 0.05, -0.01)
        f = vignetted((64, 64), mask64, coeffs)
        model = fit_radial_gain(f, mask64)
        assert model is not None
        # The fit runs on log-intensity, so compare gain profiles, not raw
        # coefficients; the tail exclusion also trims the support.
        rho = np.linspace(0.1, 0.9, 50)
        true = RadialGainModel(*coeffs).gain(rho)
        assert np.max(np.abs(model.gain(rho) - true) / true) < 0.10

    def test_flat_frame_near_unit_gain(self, mask64):
        model = fit_radial_gain(np.full((64, 64), 90.0), mask64)
        if model is not None:
            rho = np.linspace(0, 1, 50)
            assert np.allclose(model.gain(rho), 1.0, atol=1e-6)

    def test_degenerate_when_nonpositive(self, mask64):
        assert fit_radial_gain(np.full((64, 64), 0.0) + 1e-300, mask64) is None

    def test_gain_floor(self):
        model = RadialGainModel(a1=-5.0, a2=0.0, a3=0.0)
        assert np.all(model.gain(np.linspace(0, 1, 20)) >= 0.05)


class TestCorrection:
    def test_flattens_synthetic_vignette(self, mask64):
        f = vignetted((64, 64), mask64, (-0.3, 0.04, 0.0))
        res = correct_vignetting(f, mask64)
        assert not res.degenerate
        inside = mask64.inside(f.shape)
        corrected = res.frame[inside]
        # log-domain poly fit of a ratio-of-polynomials gain is an
        # approximation; expect a strong but not total flattening.
        assert corrected.std() < 0.35 * f[inside].std()

    def test_preserves_masked_mean(self, mask64, rng):
        f = vignetted((64, 64), mask64, (-0.3, 0.04, 0.0))
        f = f * (1.0 + 0.01 * rng.standard_normal(f.shape))
        res = correct_vignetting(f, mask64)
        inside = mask64.inside(f.shape)
        assert np.isclose(res.frame[inside].mean(), f[inside].mean(), rtol=1e-9)

    def test_degenerate_passthrough(self, mask64):
        f = np.full((64, 64), 1e-300)
        res = correct_vignetting(f, mask64)
        assert res.degenerate
        assert np.array_equal(res.frame, f)

    def test_outside_untouched(self, mask64):
        f = vignetted((64, 64), mask64, (-0.3, 0.04, 0.0))
        f[0, 0] = 17.5
        res = correct_vignetting(f, mask64)
        assert res.frame[0, 0] == 17.5


class TestExtrapolation:
    def test_interior_bit_exact(self, mask64, rng):
        f = smooth_positive_frame(rng)
        g = extrapolate_radial(f, mask64)
        inside = mask64.inside(f.shape)
        assert np.array_equal(g[inside], f[inside])

    def test_upwind_residual_zero(self, mask64, rng):
        f = smooth_positive_frame(rng)
        g = extrapolate_radial(f, mask64)
        res = upwind_residual(g, mask64)
        assert res.size > 0
        assert np.max(np.abs(res)) <= 1e-9

    def test_axis_aligned_slope_is_one(self):
        # Along the row through the center the scheme degenerates to a 1-D
        # unit-slope recursion, so consecutive exterior pixels differ by ~1.
        f = np.full((64, 64), 50.0)
        mask = CircularMask.for_shape((64, 64))
        g = extrapolate_radial(f, mask)
        row = g[31, :]  # center_y = 32 in 1-based coords -> index 31
        outside = ~mask.inside(f.shape)[31, :]
        right = np.flatnonzero(outside & (np.arange(64) > 32))
        diffs = np.diff(row[right])
        assert np.allclose(diffs, 1.0, atol=1e-9)

    def test_no_mask_radius_too_large(self):
        with pytest.raises(Exception):
            CircularMask.for_shape((64, 64), radius=40)

    def test_grows_with_distance(self, mask64):
        f = np.full((64, 64), 10.0)
        g = extrapolate_radial(f, mask64)
        # Exterior values exceed the boundary value and the far corner is the
        # largest along its diagonal.
        assert g[0, 0] > 10.0
        assert g[0, 0] > g[5, 5]
