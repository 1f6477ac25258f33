"""Frame primitives: grayscale conversion, separable Gaussian smoothing with
mirror boundaries, circular masking and masked norms.

A frame is a plain 2-D float64 array with intensities on the [0, 255] scale.
Row index i is the y coordinate, column index j is the x coordinate; all
coordinate formulas in this package use 1-based index values.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.ndimage import convolve1d

from .errors import DimensionError, ParameterError

# Rec.601 luma weights for R, G, B.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

MIN_FRAME_SIDE = 8


def validate_frame(f) -> np.ndarray:
    """Coerce to a float64 frame, checking dimensions and finiteness."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionError(f"frame must be 2-D, got shape {f.shape}")
    if f.shape[0] < MIN_FRAME_SIDE or f.shape[1] < MIN_FRAME_SIDE:
        raise DimensionError(f"frame too small: {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("frame contains non-finite values")
    return f


def to_grayscale(rgb) -> np.ndarray:
    """Convert an (Ny, Nx, 3) color image to a grayscale frame (Rec.601 luma)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        return validate_frame(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DimensionError(f"expected (Ny, Nx, 3) color image, got {rgb.shape}")
    r, g, b = GRAY_WEIGHTS
    return validate_frame(r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2])


@dataclass(frozen=True)
class CircularMask:
    """Circular field of view centered at (Nx/2, Ny/2) in 1-based coordinates."""

    radius: float
    center_x: float
    center_y: float

    @classmethod
    def for_shape(cls, shape, radius: float | None = None) -> "CircularMask":
        ny, nx = shape
        if radius is None:
            radius = 0.45 * nx
        if not 0 < radius <= min(nx, ny) / 2:
            raise ParameterError(f"mask radius {radius} out of range for {shape}")
        return cls(radius=float(radius), center_x=nx / 2.0, center_y=ny / 2.0)

    def inside(self, shape) -> np.ndarray:
        """Boolean array, True where (i - cy)^2 + (j - cx)^2 <= R^2."""
        return _inside_cached(self.radius, self.center_x, self.center_y, tuple(shape))


@lru_cache(maxsize=32)
def _inside_cached(radius, cx, cy, shape):
    ny, nx = shape
    i = np.arange(1, ny + 1, dtype=np.float64)[:, None]
    j = np.arange(1, nx + 1, dtype=np.float64)[None, :]
    m = (i - cy) ** 2 + (j - cx) ** 2 <= radius**2
    m.setflags(write=False)
    return m


def coordinate_grids(shape):
    """1-based row (y) and column (x) coordinate grids for a frame shape."""
    ny, nx = shape
    i = np.arange(1, ny + 1, dtype=np.float64)[:, None]
    j = np.arange(1, nx + 1, dtype=np.float64)[None, :]
    return np.broadcast_to(i, (ny, nx)), np.broadcast_to(j, (ny, nx))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian taps on a stencil of 2*ceil(sigma)+1 pixels, summing to one."""
    if sigma < 1:
        raise ParameterError(f"sigma must be >= 1, got {sigma}")
    half = int(np.ceil(sigma))
    k = np.arange(-half, half + 1, dtype=np.float64)
    taps = np.exp(-(k**2) / (2.0 * sigma**2))
    return taps / taps.sum()


def gaussian_convolve(f, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing, rows then columns, mirror boundaries.

    The mirror extension reflects without repeating the edge pixel, so a
    kernel centered at the first column sees (f[1], f[0], f[1], f[2], ...).
    """
    f = np.asarray(f, dtype=np.float64)
    taps = gaussian_kernel(sigma)
    out = convolve1d(f, taps, axis=1, mode="mirror")
    out = convolve1d(out, taps, axis=0, mode="mirror")
    return out


def positive_part(w) -> np.ndarray:
    """Pixelwise max(w, 0)."""
    return np.maximum(np.asarray(w, dtype=np.float64), 0.0)


def apply_mask(f, mask: CircularMask, fill: float = 0.0) -> np.ndarray:
    """Set pixels outside the circular mask to ``fill``; inside untouched."""
    f = np.asarray(f, dtype=np.float64)
    out = np.where(mask.inside(f.shape), f, fill)
    return out


def frobenius_distance(a, b, mask: CircularMask) -> float:
    """Frobenius norm of (a - b) restricted to the pixels inside the mask."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    inside = mask.inside(a.shape)
    d = (a - b)[inside]
    return float(np.sqrt(np.dot(d, d)))
