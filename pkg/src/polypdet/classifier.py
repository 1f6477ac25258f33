"""Best-fit-ball decision parameter and the end-to-end per-frame pipeline.

Each kept feature gets a clipped paraboloid cap fitted to the mid-pass image
by an exhaustive integer radius scan; the frame score is the largest optimal
radius and the label compares it against the discrimination threshold.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import io
from .errors import ParameterError
from .geometry import Feature, features_from_components, geometric_filter
from .imaging import CircularMask, coordinate_grids, to_grayscale, validate_frame
from .midpass import (
    binary_segment,
    connected_components,
    midpass_filter,
    segmentation_threshold,
)
from .params import PipelineParams
from .preprocess import correct_vignetting, extrapolate_radial
from .texture import decompose_cartoon_texture, preselect, texture_transform

LABEL_POLYP = "polyp"
LABEL_NORMAL = "normal"

# Stages at which a frame can exit the pipeline.
STAGE_PRESELECT = "preselect"
STAGE_GEOMETRY = "geometry"
STAGE_CLASSIFIER = "classifier"


@dataclass(frozen=True)
class BallFit:
    feature_index: int
    center_x: float
    center_y: float
    mass: float
    r_opt: int
    objective: float
    weighted: bool = True  # False when the zero-mass fallback centroid was used


def weighted_centroid(u, rows, cols) -> tuple[float, float, float, bool]:
    """u-weighted mean 1-based coordinates over the feature's pixels.

    Returns (c_x, c_y, mass, weighted); a zero mass falls back to the
    unweighted centroid with ``weighted=False``.
    """
    w = np.asarray(u, dtype=np.float64)[rows, cols]
    mass = float(w.sum())
    x = np.asarray(cols, dtype=np.float64) + 1.0
    y = np.asarray(rows, dtype=np.float64) + 1.0
    if mass <= 0:
        return float(x.mean()), float(y.mean()), 0.0, False
    return float(np.dot(x, w) / mass), float(np.dot(y, w) / mass), mass, True


def ball_surface(r: float, center_x: float, center_y: float, shape, nx: int):
    """Clipped paraboloid cap (R^2 - dy^2 - dx^2) / Nx^2, zero where negative."""
    if r < 1:
        raise ParameterError(f"ball radius must be >= 1, got {r}")
    yy, xx = coordinate_grids(shape)
    b = (r**2 - (yy - center_y) ** 2 - (xx - center_x) ** 2) / float(nx) ** 2
    return np.maximum(b, 0.0)


def fit_ball_radius(
    u,
    center_x: float,
    center_y: float,
    mask: CircularMask,
    nx: int,
    r_max_search: int | None = None,
) -> tuple[int, float]:
    """Exhaustive scan of integer radii in [1, Nx//3], smallest radius on ties.

    Returns (r_opt, objective): the radius minimizing the masked Frobenius
    distance between u and the clipped cap, and the distance at the optimum.
    """
    u = np.asarray(u, dtype=np.float64)
    if r_max_search is None:
        r_max_search = nx // 3
    inside = mask.inside(u.shape)
    yy, xx = coordinate_grids(u.shape)
    d2 = ((yy - center_y) ** 2 + (xx - center_x) ** 2)[inside]
    uv = u[inside]
    inv_nx2 = 1.0 / float(nx) ** 2

    best_r, best_obj = 1, math.inf
    for r in range(1, r_max_search + 1):
        cap = np.maximum(r * r - d2, 0.0) * inv_nx2
        diff = uv - cap
        obj = float(np.dot(diff, diff))
        if obj < best_obj:
            best_r, best_obj = r, obj
    return best_r, math.sqrt(best_obj)


def decision_radius(fits: list[BallFit]) -> int:
    """Maximum optimal radius over the kept features; 0 when none."""
    if not fits:
        return 0
    return max(f.r_opt for f in fits)


def classify(r_max: int, r_p: int) -> str:
    """"polyp" iff r_max >= r_p (inclusive)."""
    if r_p <= 0:
        raise ParameterError(f"r_p must be > 0, got {r_p}")
    return LABEL_POLYP if r_max >= r_p else LABEL_NORMAL


@dataclass
class FeatureRecord:
    """Per-feature slice of a frame decision, serializable to JSON."""

    index: int
    size: int
    eccentricity: float | None  # None when the size test failed (not computed)
    centroid_x: float | None
    centroid_y: float | None
    passed_size: bool
    kept: bool
    r_opt: int | None = None
    weighted_centroid_x: float | None = None
    weighted_centroid_y: float | None = None

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        e = d["eccentricity"]
        if e is not None and math.isinf(e):
            d["eccentricity"] = "inf"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureRecord":
        d = dict(d)
        if d.get("eccentricity") == "inf":
            d["eccentricity"] = float("inf")
        return cls(**d)


@dataclass
class FrameDecision:
    """Everything the pipeline decided about one frame."""

    frame_id: str
    t_max: float
    preselect: bool
    theta: float | None
    n_components: int
    features: list[FeatureRecord] = field(default_factory=list)
    r_max: int = 0
    label: str = LABEL_NORMAL
    exit_stage: str = STAGE_PRESELECT

    def to_json(self) -> str:
        d = dict(self.__dict__)
        d["features"] = [f.to_dict() for f in self.features]
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "FrameDecision":
        d = json.loads(line)
        d["features"] = [FeatureRecord.from_dict(f) for f in d["features"]]
        return cls(**d)


@dataclass
class FrameArtifacts:
    """Intermediate arrays kept for rendering and debugging."""

    preprocessed: np.ndarray | None = None
    texture: np.ndarray | None = None
    transformed_texture: np.ndarray | None = None
    midpass: np.ndarray | None = None
    segmentation: np.ndarray | None = None
    feature_objects: list[Feature] = field(default_factory=list)
    ball_fits: list[BallFit] = field(default_factory=list)


def preprocess_frame(image, params: PipelineParams) -> np.ndarray:
    """Grayscale, vignetting correction and radial extrapolation."""
    gray = to_grayscale(image) if np.asarray(image).ndim == 3 else validate_frame(image)
    mask = CircularMask.for_shape(gray.shape, params.r_mask)
    corrected = correct_vignetting(gray, mask).frame
    return extrapolate_radial(corrected, mask)


def process_frame(
    image,
    params: PipelineParams | None = None,
    frame_id: str = "",
    keep_artifacts: bool = False,
    preprocessed: bool = False,
) -> FrameDecision | tuple[FrameDecision, FrameArtifacts]:
    """Run the full per-frame pipeline and record every intermediate scalar.

    ``image`` may be a path, a color array or a grayscale array; with
    ``preprocessed=True`` it is taken as the pre-processed frame directly.
    """
    if params is None:
        params = PipelineParams()
    if isinstance(image, (str, bytes)) or hasattr(image, "__fspath__"):
        image = io.load_image(image)

    arr = np.asarray(image)
    shape = arr.shape[:2]
    params = params.adapted_to_shape(*shape)

    art = FrameArtifacts()
    if preprocessed:
        f = validate_frame(image)
    else:
        f = preprocess_frame(image, params)
    art.preprocessed = f
    mask = CircularMask.for_shape(f.shape, params.r_mask)

    # Texture pre-selection.
    decomp = decompose_cartoon_texture(f, params.sigma_t, params.n_iter)
    peak = texture_transform(decomp.texture, params.sigma, params.p, mask)
    art.texture = decomp.texture
    art.transformed_texture = peak.transformed
    passed = preselect(peak.t_max, params.t_lower, params.t_upper)
    decision = FrameDecision(
        frame_id=frame_id,
        t_max=peak.t_max,
        preselect=passed,
        theta=None,
        n_components=0,
    )
    if not passed:
        decision.label = classify(0, params.r_p)
        decision.exit_stage = STAGE_PRESELECT
        return (decision, art) if keep_artifacts else decision

    # Mid-pass filtering and segmentation.
    u = midpass_filter(f, params.sigma1, params.sigma2, mask)
    theta = segmentation_threshold(u, params.m_lower, params.m_upper)
    s = binary_segment(u, theta)
    components = connected_components(s)
    art.midpass = u
    art.segmentation = s
    decision.theta = theta
    decision.n_components = len(components)

    # Geometric criteria.
    feats = features_from_components(components)
    art.feature_objects = feats
    kept = set(
        geometric_filter(feats, params.s_lower, params.s_upper, params.e_max)
    )
    for feat in feats:
        passed_size = params.s_lower <= feat.size <= params.s_upper
        rec = FeatureRecord(
            index=feat.index,
            size=feat.size,
            eccentricity=feat.eccentricity if passed_size else None,
            centroid_x=feat.centroid[0] if passed_size else None,
            centroid_y=feat.centroid[1] if passed_size else None,
            passed_size=passed_size,
            kept=feat.index in kept,
        )
        decision.features.append(rec)

    if not kept:
        decision.label = classify(0, params.r_p)
        decision.exit_stage = STAGE_GEOMETRY
        return (decision, art) if keep_artifacts else decision

    # Ball fitting over the kept features.
    for feat in feats:
        if feat.index not in kept:
            continue
        cx, cy, mass, weighted = weighted_centroid(u, feat.rows, feat.cols)
        r_opt, obj = fit_ball_radius(
            u, cx, cy, mask, params.nx, params.r_search_max
        )
        fit = BallFit(
            feature_index=feat.index,
            center_x=cx,
            center_y=cy,
            mass=mass,
            r_opt=r_opt,
            objective=obj,
            weighted=weighted,
        )
        art.ball_fits.append(fit)
        rec = decision.features[feat.index]
        rec.r_opt = r_opt
        rec.weighted_centroid_x = cx
        rec.weighted_centroid_y = cy

    decision.r_max = decision_radius(art.ball_fits)
    decision.label = classify(decision.r_max, params.r_p)
    decision.exit_stage = STAGE_CLASSIFIER
    return (decision, art) if keep_artifacts else decision
