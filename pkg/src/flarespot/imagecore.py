"""Image containers, sRGB <-> CIELab conversion and window normalization.

Conventions used across the package:

* RGB images are ``(H, W, 3)`` ``uint8`` arrays.
* Lab images are :class:`LabImage` objects holding three ``float64`` planes.
* Points are ``(x, y)`` pairs (column, row); arrays are indexed ``[y, x]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindow

# D65 reference white, 2 degree observer
WHITE_D65 = np.array([0.95047, 1.0, 1.08883])

_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

_EPS = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 6.0) ** 2 / 3.0


@dataclass(frozen=True)
class LabImage:
    """CIELab planes of an image. ``L`` lies in [0, 100]."""

    L: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if not (self.L.shape == self.a.shape == self.b.shape) or self.L.ndim != 2:
            raise ValueError("Lab planes must be 2-D and share one shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.L.shape

    @classmethod
    def from_array(cls, lab: np.ndarray) -> "LabImage":
        lab = np.asarray(lab, dtype=np.float64)
        return cls(lab[..., 0], lab[..., 1], lab[..., 2])

    def to_array(self) -> np.ndarray:
        return np.stack([self.L, self.a, self.b], axis=-1)


@dataclass(frozen=True)
class Window:
    """Disc-shaped search window of ``radius`` pixels around ``center = (x, y)``."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("window radius must be positive")

    def mask(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean mask of the window clipped to an image of ``shape``."""
        h, w = shape
        yy, xx = np.ogrid[:h, :w]
        cx, cy = self.center
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= self.radius ** 2

    def contains(self, point) -> bool:
        cx, cy = self.center
        return (point[0] - cx) ** 2 + (point[1] - cy) ** 2 <= self.radius ** 2


def as_rgb(img) -> np.ndarray:
    """Validate and return an ``(H, W, 3)`` uint8 RGB array."""
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return arr


def srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.clip(c, 0.0, None)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1.0 / 2.4) - 0.055)


def _f(t):
    return np.where(t > _EPS, np.cbrt(t), _KAPPA * t + 4.0 / 29.0)


def _finv(t):
    return np.where(t > 6.0 / 29.0, t ** 3, (t - 4.0 / 29.0) / _KAPPA)


def rgb_float_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert sRGB floats in [0, 1] (shape ``(..., 3)``) to Lab ``(..., 3)``."""
    xyz = srgb_to_linear(np.asarray(rgb, dtype=np.float64)) @ _RGB_TO_XYZ.T
    f = _f(xyz / WHITE_D65)
    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_rgb_float(lab: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_float_to_lab`; result is *not* clipped to [0, 1]."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_finv(fx), _finv(fy), _finv(fz)], axis=-1) * WHITE_D65
    lin = xyz @ _XYZ_TO_RGB.T
    # keep sign for out-of-gamut detection downstream
    return np.where(lin < 0, lin, linear_to_srgb(lin))


def rgb_to_lab(img) -> LabImage:
    """Convert an 8-bit sRGB image to CIELab (D65 white point).

    Parameters
    ----------
    img : array_like, shape (H, W, 3)
        8-bit sRGB image.

    Returns
    -------
    LabImage
        ``L`` in [0, 100]; ``a`` and ``b`` unbounded floats.
    """
    rgb = as_rgb(img).astype(np.float64) / 255.0
    lab = rgb_float_to_lab(rgb)
    # white maps to 100 only up to matrix round-off
    lab[..., 0] = np.clip(lab[..., 0], 0.0, 100.0)
    return LabImage.from_array(lab)


def lab_to_rgb(lab: LabImage | np.ndarray) -> np.ndarray:
    """Convert Lab back to a clipped, rounded 8-bit sRGB image."""
    arr = lab.to_array() if isinstance(lab, LabImage) else np.asarray(lab)
    rgb = lab_to_rgb_float(arr)
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)


def normalize_window(L: np.ndarray, window: Window) -> np.ndarray:
    """Rescale luminance so that the window's min maps to 0 and its max to 1.

    The affine map is computed from the pixels inside the window clipped to
    the image domain. It is then applied to the whole plane and clipped to
    [0, 1], so values inside the window are the exact normalized values and
    pixels outside saturate. A constant window yields an all-zero plane.

    Raises
    ------
    EmptyWindow
        If the window does not intersect the image.
    """
    L = np.asarray(L, dtype=np.float64)
    inside = window.mask(L.shape)
    if not inside.any():
        raise EmptyWindow(f"window {window} does not intersect a {L.shape} image")
    values = L[inside]
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(L)
    return np.clip((L - lo) / (hi - lo), 0.0, 1.0)
