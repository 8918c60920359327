"""Binary level sets, 8-connected components and disc morphology."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import OutOfBounds

EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Component:
    """One 8-connected component. ``xs``/``ys`` hold the pixel coordinates."""

    xs: np.ndarray
    ys: np.ndarray

    @property
    def area(self) -> int:
        return int(self.xs.size)

    @property
    def centroid(self) -> tuple[float, float]:
        return float(self.xs.mean()), float(self.ys.mean())

    def to_mask(self, shape) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        m[self.ys, self.xs] = True
        return m


def disc(radius: float) -> np.ndarray:
    """Structuring element ``{(dx, dy): dx^2 + dy^2 <= radius^2}``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    r = int(np.floor(radius))
    d = np.arange(-r, r + 1)
    return d[None, :] ** 2 + d[:, None] ** 2 <= radius ** 2


def upper_level_set(plane, iota: float) -> np.ndarray:
    return np.asarray(plane) >= iota


def bilevel_set(plane, seed_value: float, delta: float) -> np.ndarray:
    if delta < 0:
        raise ValueError("delta must be non-negative")
    return np.abs(np.asarray(plane, dtype=np.float64) - seed_value) <= delta


def connected_components(mask) -> list[Component]:
    """8-connected components, largest first; ties by first pixel in raster order."""
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=EIGHT)
    if n == 0:
        return []
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=n + 1)
    starts = np.concatenate([[0], np.cumsum(counts)])
    w = labels.shape[1]
    comps = []
    for lab in range(1, n + 1):
        idx = order[starts[lab]:starts[lab + 1]]
        comps.append((idx[0], Component(xs=idx % w, ys=idx // w)))
    comps.sort(key=lambda t: (-t[1].area, t[0]))
    return [c for _, c in comps]


def component_containing(mask, point) -> Component | None:
    """The 8-connected component of ``mask`` holding ``point = (x, y)``."""
    mask = np.asarray(mask, dtype=bool)
    x, y = int(point[0]), int(point[1])
    h, w = mask.shape
    if not (0 <= x < w and 0 <= y < h):
        raise OutOfBounds(f"point {(x, y)} outside {w}x{h} domain")
    if not mask[y, x]:
        return None
    labels, _ = ndimage.label(mask, structure=EIGHT)
    ys, xs = np.nonzero(labels == labels[y, x])
    return Component(xs=xs, ys=ys)


def bounded_flood_area(region, point, limit: int) -> int:
    """Area of the 8-component of ``region`` at ``point``, counting at most ``limit``.

    Stops as soon as ``limit`` pixels are reached, so the cost is bounded by
    the limit rather than by the component size.
    """
    region = np.asarray(region, dtype=bool)
    h, w = region.shape
    x0, y0 = int(point[0]), int(point[1])
    if not region[y0, x0]:
        return 0
    seen = {(y0, x0)}
    stack = [(y0, x0)]
    while stack and len(seen) < limit:
        y, x = stack.pop()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w and (ny, nx) not in seen and region[ny, nx]:
                    seen.add((ny, nx))
                    stack.append((ny, nx))
    return min(len(seen), limit)


def dilation(mask, radius: float) -> np.ndarray:
    return ndimage.binary_dilation(np.asarray(mask, dtype=bool), structure=disc(radius))


def erosion(mask, radius: float) -> np.ndarray:
    # out-of-domain pixels count as unset
    return ndimage.binary_erosion(np.asarray(mask, dtype=bool), structure=disc(radius),
                                  border_value=0)


def opening(mask, radius: float) -> np.ndarray:
    return dilation(erosion(mask, radius), radius)
