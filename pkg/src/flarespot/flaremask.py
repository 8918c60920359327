"""Binary flare mask construction from detected flare points."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .detector import FlareDetection
from .imagecore import LabImage, Window, normalize_window
from .morphology import bilevel_set, component_containing, dilation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlareRegion:
    mask: np.ndarray
    detection: FlareDetection

    @property
    def area(self) -> int:
        return int(self.mask.sum())


def build_flare_region(lab: LabImage, det: FlareDetection, delta: float = 10.0,
                       epsilon: float = 5.0, alpha: float = 0.2,
                       window: Window | None = None) -> FlareRegion | None:
    """Grow the flare region around ``det.flare_point``.

    The similar-brightness component containing the flare point is dilated by
    a disc of radius ``epsilon`` and then restricted to pixels whose
    window-normalized luminance is at least ``alpha``. Returns ``None`` when
    that restriction leaves nothing.
    """
    window = window or det.window
    x, y = det.flare_point
    seed = component_containing(bilevel_set(lab.L, lab.L[y, x], delta), (x, y))
    grown = dilation(seed.to_mask(lab.shape), epsilon)
    region = grown & (normalize_window(lab.L, window) >= alpha)
    if not region.any():
        log.info("flare at %s dropped: no pixel above alpha=%s", det.flare_point, alpha)
        return None
    return FlareRegion(mask=region, detection=det)


def merge_masks(regions, dims) -> np.ndarray:
    """Union of region masks; ``dims`` is ``(width, height)``."""
    w, h = dims
    out = np.zeros((h, w), dtype=bool)
    for r in regions:
        out |= r.mask if isinstance(r, FlareRegion) else np.asarray(r, dtype=bool)
    return out


def build_mask(lab: LabImage, detections, delta: float = 10.0, epsilon: float = 5.0,
               alpha: float = 0.2) -> tuple[np.ndarray, list[FlareRegion]]:
    regions = [build_flare_region(lab, d, delta, epsilon, alpha) for d in detections]
    regions = [r for r in regions if r is not None]
    return merge_masks(regions, (lab.shape[1], lab.shape[0])), regions
