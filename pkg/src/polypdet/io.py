"""Image decode/encode: 8-bit grayscale and RGB PNG, binary PGM/PPM.

Decoded pixel values map to reals on [0, 255] without rescaling.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError


def load_image(path) -> np.ndarray:
    """Load an image as float64: (Ny, Nx) for grayscale, (Ny, Nx, 3) for color."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode in ("L", "I;16", "I"):
                arr = np.asarray(img.convert("L"), dtype=np.float64)
            else:
                arr = np.asarray(img.convert("RGB"), dtype=np.float64)
    except FileNotFoundError as e:
        raise InputError(f"image not found: {path}") from e
    except Exception as e:
        raise InputError(f"cannot decode image {path}: {e}") from e
    return arr


def save_image(path, arr) -> None:
    """Save a [0, 255] array as 8-bit PNG/PGM/PPM depending on extension."""
    arr = np.asarray(arr)
    data = np.clip(np.round(arr), 0, 255).astype(np.uint8)
    if data.ndim == 2:
        img = Image.fromarray(data, mode="L")
    elif data.ndim == 3 and data.shape[2] == 3:
        img = Image.fromarray(data, mode="RGB")
    else:
        raise InputError(f"cannot encode array of shape {arr.shape}")
    img.save(Path(path))
