"""Full-resolution Gaussian / difference-of-Gaussians scale space and bright-blob keypoints."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ImageTooSmall

K_DEFAULT = 2.0 ** (1.0 / 5.0)
TRUNCATE = 4.0
# |D| below this is treated as round-off, not a blob
RESPONSE_EPS = 1e-8


@dataclass(frozen=True)
class ScaleSpace:
    """Blurred levels ``L(., sigmas[i])`` and DoG planes ``dogs[i] = levels[i+1] - levels[i]``.

    ``sigmas`` is the working ladder padded with one level below ``sigma_min``
    and one above the last ladder value, so that every ladder scale owns a DoG
    plane with a neighbour on each side. ``dogs[i]`` is attributed to
    ``sigmas[i]``; the first and last DoG planes only serve as neighbours.
    """

    sigmas: np.ndarray
    levels: list = field(repr=False)
    dogs: list = field(repr=False)

    @property
    def dog_sigmas(self) -> np.ndarray:
        return self.sigmas[:-1]

    @property
    def ladder(self) -> np.ndarray:
        return self.sigmas[1:-1]


@dataclass(frozen=True)
class Keypoint:
    position: tuple[int, int]
    sigma: float
    response: float
    hessian_eig: tuple[float, float]
    scale_index: int = 0


def sigma_ladder(sigma_min: float, sigma_max: float, k: float) -> np.ndarray:
    """Geometric ladder ``sigma_min * k**i`` up to and including the first value >= ``sigma_max``."""
    if not 0 < sigma_min < sigma_max:
        raise ValueError("need 0 < sigma_min < sigma_max")
    if not k > 1:
        raise ValueError("need k > 1")
    n = int(np.ceil(np.log(sigma_max / sigma_min) / np.log(k) - 1e-12))
    return sigma_min * k ** np.arange(n + 1)


def gaussian_blur(plane: np.ndarray, sigma: float) -> np.ndarray:
    # separable, unit-sum kernel truncated at 4 sigma, symmetric-reflected borders
    return ndimage.gaussian_filter(plane, sigma, mode="reflect", truncate=TRUNCATE)


def build_scalespace(gray, sigma_min: float = 3.0, sigma_max: float = 15.0,
                     k: float = K_DEFAULT) -> ScaleSpace:
    """Blur ``gray`` along the padded sigma ladder and take differences.

    Raises
    ------
    ImageTooSmall
        If the shorter image side is below ``4 * sigma_min``.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if min(gray.shape) < 4 * sigma_min:
        raise ImageTooSmall(f"image {gray.shape} too small for sigma_min={sigma_min}")
    ladder = sigma_ladder(sigma_min, sigma_max, k)
    sigmas = np.concatenate([[ladder[0] / k], ladder, [ladder[-1] * k]])
    levels = [gaussian_blur(gray, s) for s in sigmas]
    dogs = [levels[i + 1] - levels[i] for i in range(len(levels) - 1)]
    return ScaleSpace(sigmas=sigmas, levels=levels, dogs=dogs)


def hessian_eigenvalues(D: np.ndarray, x: int, y: int) -> tuple[float, float]:
    """Eigenvalues (ascending) of the central-difference Hessian of ``D`` at ``(x, y)``."""
    dxx = D[y, x + 1] - 2.0 * D[y, x] + D[y, x - 1]
    dyy = D[y + 1, x] - 2.0 * D[y, x] + D[y - 1, x]
    dxy = 0.25 * (D[y + 1, x + 1] - D[y + 1, x - 1] - D[y - 1, x + 1] + D[y - 1, x - 1])
    half_tr = 0.5 * (dxx + dyy)
    disc = np.sqrt(0.25 * (dxx - dyy) ** 2 + dxy ** 2)
    return float(half_tr - disc), float(half_tr + disc)


_RING = np.ones((3, 3), dtype=bool)
_RING[1, 1] = False


def detect_keypoints(ss: ScaleSpace, eps: float = RESPONSE_EPS) -> list[Keypoint]:
    """Strict local minima of D over the 26-neighbourhood with negative response.

    Pixels on the image border and the outermost DoG scales are never
    reported. Output is ordered by scale index, then raster position.
    """
    dogs = ss.dogs
    if len(dogs) < 3:
        raise ValueError("need at least three DoG planes")
    full_min = [ndimage.minimum_filter(d, size=3, mode="nearest") for d in dogs]
    keypoints = []
    for s in range(1, len(dogs) - 1):
        D = dogs[s]
        ring_min = ndimage.minimum_filter(D, footprint=_RING, mode="nearest")
        neigh = np.minimum(ring_min, np.minimum(full_min[s - 1], full_min[s + 1]))
        is_min = (D < neigh) & (D < -eps)
        is_min[0, :] = is_min[-1, :] = False
        is_min[:, 0] = is_min[:, -1] = False
        for y, x in zip(*np.nonzero(is_min)):
            keypoints.append(Keypoint(
                position=(int(x), int(y)),
                sigma=float(ss.sigmas[s]),
                response=float(D[y, x]),
                hessian_eig=hessian_eigenvalues(D, x, y),
                scale_index=s,
            ))
    return keypoints


def elongation_ok(kp: Keypoint) -> bool:
    """Accept only strict, roughly round minima: ``l1 > 0`` and ``l2 < 4 * l1``."""
    l1, l2 = kp.hessian_eig
    return l1 > 0 and l2 < 4 * l1
