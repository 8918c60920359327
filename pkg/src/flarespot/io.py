"""PNG/JPEG reading and writing for images and binary masks."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def read_image(path) -> np.ndarray:
    """Decode an image file to an ``(H, W, 3)`` uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image(path, rgb: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)
    return path


def read_mask(path) -> np.ndarray:
    """Single-channel mask; any non-zero pixel counts as set."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) > 0


def write_mask(path, mask: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(mask, dtype=bool).astype(np.uint8) * 255, mode="L").save(path)
    return path


def overlay(rgb: np.ndarray, mask: np.ndarray, color=(255, 0, 0)) -> np.ndarray:
    """Draw the inner boundary of ``mask`` on a copy of ``rgb``."""
    from scipy import ndimage

    mask = np.asarray(mask, dtype=bool)
    edge = mask & ~ndimage.binary_erosion(mask, border_value=0)
    out = np.array(rgb, dtype=np.uint8, copy=True)
    out[edge] = color
    return out


def normalized_png(plane: np.ndarray) -> np.ndarray:
    """Stretch a float plane to 0..255 gray for debug dumps."""
    plane = np.asarray(plane, dtype=np.float64)
    lo, hi = plane.min(), plane.max()
    scaled = np.zeros_like(plane) if hi == lo else (plane - lo) / (hi - lo)
    g = np.rint(scaled * 255).astype(np.uint8)
    return np.repeat(g[..., None], 3, axis=-1)
