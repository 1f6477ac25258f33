"""Intensity normalization and radial extrapolation outside the field of view.

Vignetting is modeled by a radial even-polynomial gain fitted on log-intensity
inside the circular mask. Extrapolation extends the masked frame to the full
rectangle by a single distance-ordered upwind sweep that enforces a unit radial
derivative, removing the discontinuity at the mask edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .imaging import CircularMask, coordinate_grids, validate_frame

# Gain is never allowed to shrink below this, bounding the correction at 20x.
_GAIN_FLOOR = 0.05

# Intensity tails excluded from the gain fit: dark lumen holes and bright
# highlights/protrusions would otherwise bias the radial polynomial.
_DARK_EXCLUDE = 0.05
_BRIGHT_EXCLUDE = 0.05


@dataclass(frozen=True)
class RadialGainModel:
    """g(rho) = 1 + a1*rho^2 + a2*rho^4 + a3*rho^6, rho = distance / R_mask."""

    a1: float
    a2: float
    a3: float

    def gain(self, rho) -> np.ndarray:
        rho2 = np.asarray(rho, dtype=np.float64) ** 2
        g = 1.0 + self.a1 * rho2 + self.a2 * rho2**2 + self.a3 * rho2**3
        return np.maximum(g, _GAIN_FLOOR)


@dataclass(frozen=True)
class VignettingResult:
    frame: np.ndarray
    model: RadialGainModel | None
    degenerate: bool


def _rho(shape, mask: CircularMask) -> np.ndarray:
    yy, xx = coordinate_grids(shape)
    return np.hypot(yy - mask.center_y, xx - mask.center_x) / mask.radius


def fit_radial_gain(f, mask: CircularMask) -> RadialGainModel | None:
    """Least-squares fit of log f against [1, rho^2, rho^4, rho^6] in the mask.

    Returns None when the fit is degenerate (too few usable pixels or a
    rank-deficient system).
    """
    f = validate_frame(f)
    inside = mask.inside(f.shape)
    rho = _rho(f.shape, mask)
    vals = f[inside]
    rho2 = rho[inside] ** 2

    dark = np.quantile(vals, _DARK_EXCLUDE)
    bright = np.quantile(vals, 1.0 - _BRIGHT_EXCLUDE)
    use = (vals > dark) & (vals < bright) & (vals > 0)
    if use.sum() < 16:
        return None
    y = np.log(vals[use])
    r2 = rho2[use]
    A = np.stack([np.ones_like(r2), r2, r2**2, r2**3], axis=1)
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 4 or not np.all(np.isfinite(coef)):
        return None
    # coef[0] is the log base intensity; the gain keeps g(0) = 1.
    return RadialGainModel(a1=float(coef[1]), a2=float(coef[2]), a3=float(coef[3]))


def correct_vignetting(f, mask: CircularMask) -> VignettingResult:
    """Divide out the fitted radial gain inside the mask, preserving the mean.

    A degenerate fit returns the input unchanged with ``degenerate=True``.
    """
    f = validate_frame(f)
    model = fit_radial_gain(f, mask)
    if model is None:
        return VignettingResult(frame=f.copy(), model=None, degenerate=True)

    inside = mask.inside(f.shape)
    rho = _rho(f.shape, mask)
    corrected = f.copy()
    corrected[inside] = f[inside] / model.gain(rho)[inside]

    mean_in = f[inside].mean()
    mean_out = corrected[inside].mean()
    if mean_out > 0:
        corrected[inside] *= mean_in / mean_out
    return VignettingResult(frame=corrected, model=model, degenerate=False)


@lru_cache(maxsize=8)
def _sweep_plan(shape, radius, cx, cy):
    """Solve order and upwind neighbors for all pixels outside the mask.

    For each exterior pixel (increasing distance from center) the scheme is
        a * (f - f[up_y]) + b * (f - f[up_x]) = 1,
    with a = |r_y|, b = |r_x| the components of the unit radial vector and
    up_y, up_x the neighbors one step toward the center along each axis.
    Distance ordering makes every upwind neighbor final before it is read.
    """
    ny, nx = shape
    yy, xx = coordinate_grids(shape)
    dy = yy - cy
    dx = xx - cx
    d2 = dy**2 + dx**2
    outside = d2 > radius**2

    rows, cols = np.nonzero(outside)
    order = np.argsort(d2[rows, cols], kind="stable")
    rows, cols = rows[order], cols[order]

    dyo = dy[rows, cols]
    dxo = dx[rows, cols]
    norm = np.sqrt(dyo**2 + dxo**2)
    a = np.abs(dyo) / norm
    b = np.abs(dxo) / norm

    up_rows = rows - np.sign(dyo).astype(np.int64)
    up_cols = cols - np.sign(dxo).astype(np.int64)
    # Clamp is a no-op: a zero radial component means the neighbor is unused.
    up_rows = np.clip(up_rows, 0, ny - 1)
    up_cols = np.clip(up_cols, 0, nx - 1)

    idx = (rows * nx + cols).tolist()
    idx_uy = (up_rows * nx + cols).tolist()
    idx_ux = (rows * nx + up_cols).tolist()
    return idx, idx_uy, idx_ux, a.tolist(), b.tolist(), (a + b).tolist()


def extrapolate_radial(f, mask: CircularMask) -> np.ndarray:
    """Extend the frame outside the mask with a unit outward radial slope.

    Pixels inside the mask are returned bit-exact; each exterior pixel is
    solved in one pass in increasing distance from the center.
    """
    f = validate_frame(f)
    idx, idx_uy, idx_ux, a, b, ab = _sweep_plan(
        f.shape, mask.radius, mask.center_x, mask.center_y
    )
    g = f.ravel().tolist()
    for k, ky, kx, ak, bk, abk in zip(idx, idx_uy, idx_ux, a, b, ab):
        g[k] = (1.0 + ak * g[ky] + bk * g[kx]) / abk
    return np.asarray(g, dtype=np.float64).reshape(f.shape)


def upwind_residual(f, mask: CircularMask) -> np.ndarray:
    """Per-exterior-pixel residual of the upwind scheme; empty if none."""
    f = validate_frame(f)
    idx, idx_uy, idx_ux, a, b, _ = _sweep_plan(
        f.shape, mask.radius, mask.center_x, mask.center_y
    )
    g = f.ravel()
    res = np.empty(len(idx))
    for n, (k, ky, kx, ak, bk) in enumerate(zip(idx, idx_uy, idx_ux, a, b)):
        res[n] = ak * (g[k] - g[ky]) + bk * (g[k] - g[kx]) - 1.0
    return res
