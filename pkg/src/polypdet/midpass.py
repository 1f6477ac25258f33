"""Ratio-of-Gaussians mid-pass filter, clamped thresholding and labeling.

The filter is the positive part of L_s1(f) / L_s2(f) - 1 with s1 < s2; it is
invariant under intensity scaling of f and responds to protrusions whose size
falls between the two smoothing scales.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .imaging import (
    CircularMask,
    apply_mask,
    gaussian_convolve,
    positive_part,
    validate_frame,
)

# Denominator floor on the [0, 255] intensity scale; dark lumen pixels can
# push the wide smoothing toward zero.
DENOM_EPS = 1e-3

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def midpass_filter(
    f, sigma1: float, sigma2: float, mask: CircularMask, eps: float = DENOM_EPS
) -> np.ndarray:
    """Positive part of the two-scale Gaussian ratio minus one, masked to 0."""
    f = validate_frame(f)
    if not 1 <= sigma1 < sigma2:
        raise ParameterError(f"need 1 <= sigma1 < sigma2, got {sigma1}, {sigma2}")
    num = gaussian_convolve(f, sigma1)
    den = np.maximum(gaussian_convolve(f, sigma2), eps)
    u = positive_part(num / den - 1.0)
    return apply_mask(u, mask, 0.0)


def segmentation_threshold(u, m_lower: float, m_upper: float) -> float:
    """Half the peak of u, clamped to [m_lower, m_upper]."""
    if not 0 < m_lower < m_upper:
        raise ParameterError(f"need 0 < m_lower < m_upper, got {m_lower}, {m_upper}")
    half_max = 0.5 * float(np.asarray(u).max())
    return max(min(half_max, m_upper), m_lower)


def binary_segment(u, theta: float) -> np.ndarray:
    """Binary map s = 1 where u >= theta (the step function maps 0 to 1)."""
    if theta <= 0:
        raise ParameterError(f"segmentation threshold must be > 0, got {theta}")
    return (np.asarray(u, dtype=np.float64) >= theta).astype(np.uint8)


def connected_components(s) -> list[tuple[np.ndarray, np.ndarray]]:
    """8-connected components of a binary matrix as (rows, cols) index arrays.

    Components are ordered by their first pixel in a row-major scan.
    """
    s = np.asarray(s)
    labeled, n = ndimage.label(s != 0, structure=_EIGHT_CONNECTED)
    if n == 0:
        return []
    flat = labeled.ravel()
    nz = np.flatnonzero(flat)
    seen = flat[nz]
    _, first = np.unique(seen, return_index=True)
    order = seen[np.sort(first)]
    return [tuple(np.nonzero(labeled == lab)) for lab in order]
