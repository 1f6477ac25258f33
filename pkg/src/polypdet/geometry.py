"""Per-feature shape analysis: size, centroid, inertia tensor, eccentricity,
the combined size/elongation criterion and the ellipse used for overlays.

Coordinates follow the package-wide convention: x is the 1-based column index,
y the 1-based row index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFeatureError, ParameterError

# lambda_min below this fraction of lambda_max counts as zero (infinite
# elongation); degenerate features are rejected by any finite threshold.
ECC_REL_EPS = 1e-9


def feature_size(rows, cols=None) -> int:
    """Pixel count of a feature."""
    n = len(rows)
    if n == 0:
        raise ParameterError("empty pixel set")
    return n


def _raw_sums(rows, cols):
    """Exact integer raw moments of the 1-based pixel coordinates."""
    x = np.asarray(cols, dtype=np.int64) + 1
    y = np.asarray(rows, dtype=np.int64) + 1
    return (
        len(x),
        int(x.sum()), int(y.sum()),
        int((x * x).sum()), int((y * y).sum()), int((x * y).sum()),
    )


def center_of_mass(rows, cols) -> tuple[float, float]:
    """(c_x, c_y): mean 1-based column and row indices of the pixel set.

    The sums are exact integers, so each mean rounds exactly once.
    """
    if len(rows) == 0:
        raise ParameterError("empty pixel set")
    n, sx, sy, _, _, _ = _raw_sums(rows, cols)
    return sx / n, sy / n


def inertia_tensor(rows, cols) -> np.ndarray:
    """Second-moment 2x2 matrix [[sum y^2, -sum xy], [-sum xy, sum x^2]] about
    the centroid.

    Central moments come from the integer raw moments
    (sum (x - mean x)^2 = (n sum x^2 - (sum x)^2) / n and friends), so every
    entry is a single correctly rounded division of exact integers.
    """
    if len(rows) == 0:
        raise ParameterError("empty pixel set")
    n, sx, sy, sxx, syy, sxy = _raw_sums(rows, cols)
    mxx = (n * sxx - sx * sx) / n
    myy = (n * syy - sy * sy) / n
    mxy = (n * sxy - sx * sy) / n
    return np.array([[myy, -mxy], [-mxy, mxx]])


def eccentricity(inertia: np.ndarray, rel_eps: float = ECC_REL_EPS) -> float:
    """Eigenvalue ratio lambda_max / lambda_min; inf for degenerate features.

    Closed-form eigenvalues of the symmetric 2x2 matrix keep the result
    reproducible across linear algebra backends.
    """
    inertia = np.asarray(inertia, dtype=np.float64)
    a, d = inertia[0, 0], inertia[1, 1]
    b = inertia[0, 1]
    half_tr = (a + d) / 2.0
    disc = math.sqrt(((a - d) / 2.0) ** 2 + b * b)
    lam_max = half_tr + disc
    lam_min = max(half_tr - disc, 0.0)
    if lam_min <= rel_eps * max(lam_max, 0.0) or lam_max <= 0.0:
        return float("inf")
    return lam_max / lam_min


@dataclass
class Feature:
    """One connected component with its shape descriptors.

    Moments are computed lazily so tiny features rejected by the size
    criterion never pay for them.
    """

    index: int
    rows: np.ndarray
    cols: np.ndarray
    size: int = field(init=False)
    _centroid: tuple[float, float] | None = field(default=None, repr=False)
    _inertia: np.ndarray | None = field(default=None, repr=False)
    _ecc: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.size = feature_size(self.rows, self.cols)

    @property
    def centroid(self) -> tuple[float, float]:
        if self._centroid is None:
            self._centroid = center_of_mass(self.rows, self.cols)
        return self._centroid

    @property
    def inertia(self) -> np.ndarray:
        if self._inertia is None:
            self._inertia = inertia_tensor(self.rows, self.cols)
        return self._inertia

    @property
    def eccentricity(self) -> float:
        if self._ecc is None:
            self._ecc = eccentricity(self.inertia)
        return self._ecc


def features_from_components(components) -> list[Feature]:
    return [Feature(index=k, rows=r, cols=c) for k, (r, c) in enumerate(components)]


def geometric_filter(
    features: list[Feature], s_lower: int, s_upper: int, e_max: float
) -> list[int]:
    """Indices of features with size in [s_lower, s_upper] and elongation
    at most e_max (all bounds inclusive).

    The size test runs first; eccentricity is only evaluated for size-passers.
    An empty result is a normal outcome and labels the frame "normal".
    """
    if not 0 < s_lower < s_upper:
        raise ParameterError(f"need 0 < s_lower < s_upper, got {s_lower}, {s_upper}")
    if e_max < 1:
        raise ParameterError(f"e_max must be >= 1, got {e_max}")
    kept = []
    for feat in features:
        if not s_lower <= feat.size <= s_upper:
            continue
        if feat.eccentricity <= e_max:
            kept.append(feat.index)
    return kept


def ellipse_of_inertia(feature: Feature, n_samples: int = 360) -> np.ndarray:
    """(n_samples, 2) polyline of (x, y) points on the inertia ellipse.

    The ellipse is the image of the unit circle under the inertia tensor,
    scaled so its area equals the feature's pixel count.
    """
    inertia = feature.inertia
    lam_min, lam_max = np.linalg.eigvalsh(inertia)
    if lam_min <= ECC_REL_EPS * max(lam_max, 0.0) or lam_max <= 0:
        raise DegenerateFeatureError(f"feature {feature.index} has no minor axis")
    scale = np.sqrt(feature.size / (np.pi * lam_max * lam_min))
    theta = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    circle = np.stack([np.cos(theta), np.sin(theta)])
    pts = scale * (inertia @ circle)
    cx, cy = feature.centroid
    return np.stack([pts[0] + cx, pts[1] + cy], axis=1)
