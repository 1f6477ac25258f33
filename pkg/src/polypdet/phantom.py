"""Synthetic capsule-endoscopy-like frames with ground truth.

The generator renders a smooth mucosa base, elongated fold ridges, optional
round textured bumps (the detection targets), bubble fields and sensor noise,
multiplied by a radial vignetting gain inside a circular field of view. All
amplitudes below were calibrated once against the pipeline defaults (flat
frames fail the texture band from below, bubble fields from above, bump
frames land inside it) and are frozen.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .errors import ParameterError
from .imaging import CircularMask, gaussian_convolve

# Frozen generator calibration (256x256, default pipeline parameters).
BASE_INTENSITY = 100.0
BASE_VARIATION = 8.0           # large-scale illumination mottle
MUCOSA_TEXTURE = 0.9           # fine speckle on healthy tissue
FOLD_AMPLITUDE = 45.0
FOLD_WIDTH = 10.0
POLYP_AMPLITUDE = 100.0
POLYP_TEXTURE = 16.0            # additive speckle on the bump surface
BUBBLE_BRIGHTNESS = 55.0
NOISE_AMPLITUDE = 1.5
OUTSIDE_FILL = 18.0
VIGNETTE_COEFFS = (-0.30, 0.04, 0.0)

# Pink-ish tint applied when emitting RGB.
TINT = (1.0, 0.72, 0.66)


@dataclass(frozen=True)
class PolypSpec:
    center_x: float
    center_y: float
    radius: float
    amplitude: float = POLYP_AMPLITUDE
    texture_amplitude: float = POLYP_TEXTURE


@dataclass(frozen=True)
class PhantomSpec:
    seed: int
    ny: int = 256
    nx: int = 256
    base_intensity: float = BASE_INTENSITY
    vignette: tuple[float, float, float] = VIGNETTE_COEFFS
    n_folds: int = 0
    fold_amplitude: float = FOLD_AMPLITUDE
    fold_width: float = FOLD_WIDTH
    polyp: PolypSpec | None = None
    bubble_density: float = 0.0    # bubbles per 1000 in-mask pixels
    mucosa_texture: float = MUCOSA_TEXTURE
    noise_amplitude: float = NOISE_AMPLITUDE


@dataclass(frozen=True)
class GroundTruth:
    label: str
    polyp_center: tuple[float, float] | None
    polyp_radius: float | None
    polyp_mask: np.ndarray | None


def detectable_radius_band(nx: int) -> tuple[float, float]:
    """Bump radii aligned with the pipeline's feature size band."""
    return nx / 15.0, nx / 4.5


def _speckle(rng, shape, sigma: float) -> np.ndarray:
    """Band-limited unit-variance noise field."""
    field = gaussian_convolve(rng.standard_normal(shape), sigma)
    return field / field.std()


def generate_frame(spec: PhantomSpec) -> tuple[np.ndarray, GroundTruth]:
    """Render one frame; deterministic in the spec (seed included)."""
    rng = np.random.default_rng(spec.seed)
    ny, nx = spec.ny, spec.nx
    mask = CircularMask.for_shape((ny, nx))
    inside = mask.inside((ny, nx))

    yy = np.arange(1, ny + 1, dtype=np.float64)[:, None]
    xx = np.arange(1, nx + 1, dtype=np.float64)[None, :]

    f = spec.base_intensity + BASE_VARIATION * _speckle(rng, (ny, nx), nx / 6.0)
    if spec.mucosa_texture > 0:
        f += spec.mucosa_texture * _speckle(rng, (ny, nx), 1.2)

    for _ in range(spec.n_folds):
        # Ridge along a random line through a random in-mask point.
        angle = rng.uniform(0.0, np.pi)
        r0 = 0.6 * mask.radius * np.sqrt(rng.uniform())
        phi0 = rng.uniform(0.0, 2.0 * np.pi)
        px = mask.center_x + r0 * np.cos(phi0)
        py = mask.center_y + r0 * np.sin(phi0)
        d_perp = (yy - py) * np.cos(angle) - (xx - px) * np.sin(angle)
        width = spec.fold_width * rng.uniform(0.75, 1.3)
        amp = spec.fold_amplitude * rng.uniform(0.7, 1.2)
        f += amp * np.exp(-(d_perp**2) / (2.0 * width**2))

    truth = GroundTruth(
        label="normal", polyp_center=None, polyp_radius=None, polyp_mask=None
    )
    if spec.polyp is not None:
        pol = spec.polyp
        dc = np.hypot(
            pol.center_x - mask.center_x, pol.center_y - mask.center_y
        )
        if dc + pol.radius > mask.radius:
            raise ParameterError("polyp does not fit inside the circular mask")
        d2 = (yy - pol.center_y) ** 2 + (xx - pol.center_x) ** 2
        disc = d2 <= pol.radius**2
        profile = np.maximum(1.0 - d2 / pol.radius**2, 0.0) ** 0.5
        bump = pol.amplitude * profile
        bump += pol.texture_amplitude * _speckle(rng, (ny, nx), 1.5) * np.sqrt(profile)
        f += bump
        truth = GroundTruth(
            label="polyp",
            polyp_center=(pol.center_x, pol.center_y),
            polyp_radius=pol.radius,
            polyp_mask=disc,
        )

    if spec.bubble_density > 0:
        n_bubbles = int(round(spec.bubble_density * inside.sum() / 1000.0))
        for _ in range(n_bubbles):
            r0 = mask.radius * np.sqrt(rng.uniform()) * 0.95
            phi0 = rng.uniform(0.0, 2.0 * np.pi)
            bx = mask.center_x + r0 * np.cos(phi0)
            by = mask.center_y + r0 * np.sin(phi0)
            br = rng.uniform(2.5, 7.0)
            d2 = (yy - by) ** 2 + (xx - bx) ** 2
            shell = np.exp(-((np.sqrt(d2) - br) ** 2) / 2.0)
            f += BUBBLE_BRIGHTNESS * shell
            # Specular dot off-center inside the bubble.
            ds2 = (yy - by + br / 3.0) ** 2 + (xx - bx - br / 3.0) ** 2
            f += 1.6 * BUBBLE_BRIGHTNESS * np.exp(-ds2 / 1.5)

    f += spec.noise_amplitude * rng.standard_normal((ny, nx))

    a1, a2, a3 = spec.vignette
    rho2 = ((yy - mask.center_y) ** 2 + (xx - mask.center_x) ** 2) / mask.radius**2
    gain = np.maximum(1.0 + a1 * rho2 + a2 * rho2**2 + a3 * rho2**3, 0.05)
    f = f * gain
    f = np.where(inside, f, OUTSIDE_FILL)
    f = np.clip(f, 0.0, 255.0)

    rgb = np.stack([f * t for t in TINT], axis=-1)
    return np.clip(np.round(rgb), 0, 255).astype(np.uint8), truth


def normal_spec(seed: int, kind: str = "flat", ny: int = 256, nx: int = 256) -> PhantomSpec:
    """Spec for one of the three normal-frame flavors."""
    if kind == "flat":
        return PhantomSpec(seed=seed, ny=ny, nx=nx, n_folds=1)
    if kind == "folds":
        return PhantomSpec(seed=seed, ny=ny, nx=nx, n_folds=4,
                           mucosa_texture=6.0)
    if kind == "bubbles":
        return PhantomSpec(seed=seed, ny=ny, nx=nx, n_folds=1, bubble_density=1.8)
    raise ParameterError(f"unknown normal frame kind: {kind}")


def polyp_sequence_specs(
    seq_seed: int, n_frames: int, ny: int = 256, nx: int = 256
) -> list[PhantomSpec]:
    """Specs for one polyp observed over varying distance.

    The apparent radius shrinks by at least a factor of 2 from the nearest to
    the farthest frame, staying within the detectable band at the near end.
    """
    rng = np.random.default_rng(seq_seed)
    lo, hi = detectable_radius_band(nx)
    r_near = rng.uniform(0.62 * hi, 0.95 * hi)
    span = rng.uniform(2.1, 2.6)
    radii = np.geomspace(r_near, r_near / span, n_frames)
    mask = CircularMask.for_shape((ny, nx))

    specs = []
    for k, radius in enumerate(radii):
        frame_rng = np.random.default_rng((seq_seed, k))
        max_off = max(mask.radius - radius - 6.0, 0.0) * 0.55
        r0 = max_off * np.sqrt(frame_rng.uniform())
        phi0 = frame_rng.uniform(0.0, 2.0 * np.pi)
        pol = PolypSpec(
            center_x=mask.center_x + r0 * np.cos(phi0),
            center_y=mask.center_y + r0 * np.sin(phi0),
            radius=float(radius),
        )
        specs.append(
            PhantomSpec(
                seed=int(frame_rng.integers(2**31)),
                ny=ny,
                nx=nx,
                n_folds=int(frame_rng.integers(0, 3)),
                polyp=pol,
            )
        )
    return specs


def generate_dataset(
    out_dir,
    n_polyp_sequences: int = 16,
    frames_per_sequence: int = 10,
    n_normal: int = 400,
    seed: int = 0,
    ny: int = 256,
    nx: int = 256,
) -> Path:
    """Write images plus a manifest CSV; returns the manifest path.

    Polyp sequences and normal frames are split evenly between patients "1"
    and "2" so either half can serve as a training subset. Normal frames cycle
    through flat, fold-heavy and bubble-heavy flavors.
    """
    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    rows = []

    for s in range(n_polyp_sequences):
        patient = "1" if s < n_polyp_sequences / 2 else "2"
        specs = polyp_sequence_specs(seed * 100003 + s, frames_per_sequence, ny, nx)
        for k, spec in enumerate(specs):
            frame_id = f"seq{s:02d}_f{k:03d}"
            path = img_dir / f"{frame_id}.png"
            rgb, _ = generate_frame(spec)
            io.save_image(path, rgb)
            rows.append((frame_id, str(path), "polyp", patient, f"seq{s:02d}"))

    kinds = ("flat", "folds", "bubbles")
    for n in range(n_normal):
        patient = "1" if n < n_normal / 2 else "2"
        spec = normal_spec(seed * 200003 + n, kinds[n % 3], ny, nx)
        frame_id = f"norm_{n:04d}"
        path = img_dir / f"{frame_id}.png"
        rgb, _ = generate_frame(spec)
        io.save_image(path, rgb)
        rows.append((frame_id, str(path), "normal", patient, ""))

    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id", "path", "label", "patient", "sequence"])
        writer.writerows(rows)
    return manifest
