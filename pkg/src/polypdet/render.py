"""Overlay rendering: inertia ellipses, centroid markers and the decision
circle drawn onto the original frame."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .classifier import FrameArtifacts, FrameDecision
from .geometry import ellipse_of_inertia

YELLOW = (255, 220, 0)
GREEN = (0, 200, 0)


@dataclass(frozen=True)
class OverlayStyle:
    line_width: int = 2
    marker_half: int = 4
    ellipse_samples: int = 180


def _to_rgb_image(image) -> Image.Image:
    arr = np.asarray(image)
    data = np.clip(np.round(arr), 0, 255).astype(np.uint8)
    if data.ndim == 2:
        data = np.stack([data] * 3, axis=-1)
    return Image.fromarray(data, mode="RGB")


def _draw_cross(draw, x, y, half, color, width):
    draw.line([(x - half, y - half), (x + half, y + half)], fill=color, width=width)
    draw.line([(x - half, y + half), (x + half, y - half)], fill=color, width=width)


def render_overlay(
    image,
    decision: FrameDecision,
    artifacts: FrameArtifacts,
    style: OverlayStyle = OverlayStyle(),
) -> Image.Image:
    """Draw per-kept-feature ellipses, centroid crosses and the winning
    feature's decision circle. With nothing kept the image passes through
    unchanged.

    1-based pixel coordinates map to pixel centers at (coord - 1) in image
    space.
    """
    img = _to_rgb_image(image)
    kept = [f for f in decision.features if f.kept]
    if not kept:
        return img
    draw = ImageDraw.Draw(img)
    fits = {f.feature_index: f for f in artifacts.ball_fits}

    for rec in kept:
        feat = artifacts.feature_objects[rec.index]
        pts = ellipse_of_inertia(feat, style.ellipse_samples)
        poly = [(x - 1.0, y - 1.0) for x, y in pts]
        draw.polygon(poly, outline=YELLOW, width=style.line_width)
        _draw_cross(
            draw,
            feat.centroid[0] - 1.0,
            feat.centroid[1] - 1.0,
            style.marker_half,
            GREEN,
            style.line_width,
        )

    winner = max(fits.values(), key=lambda f: f.r_opt)
    cx, cy, r = winner.center_x - 1.0, winner.center_y - 1.0, decision.r_max
    draw.ellipse([cx - r, cy - r, cx + r, cy + r], outline=YELLOW, width=style.line_width)
    _draw_cross(draw, cx, cy, style.marker_half, GREEN, style.line_width)
    return img
