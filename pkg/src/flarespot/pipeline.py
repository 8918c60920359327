"""End-to-end detection, masking and removal of flare spots."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import FlareDetection, PipelineParams, detect_all
from .flaremask import FlareRegion, build_mask
from .imagecore import LabImage, as_rgb, rgb_to_lab
from .inpaint import InpaintProblem, solve


@dataclass
class FlareResult:
    image: np.ndarray
    lab: LabImage = field(repr=False)
    detections: list[FlareDetection]
    regions: list[FlareRegion] = field(default_factory=list)
    mask: np.ndarray | None = field(default=None, repr=False)
    restored: np.ndarray | None = field(default=None, repr=False)


def detect_and_mask(img, params: PipelineParams | None = None) -> FlareResult:
    params = params or PipelineParams()
    img = as_rgb(img)
    lab = rgb_to_lab(img)
    detections = detect_all(img, params, lab=lab)
    mask, regions = build_mask(lab, detections, params.delta, params.epsilon, params.alpha)
    return FlareResult(image=img, lab=lab, detections=detections, regions=regions, mask=mask)


def remove_flares(img, params: PipelineParams | None = None, seed: int = 0,
                  patch_side: int = 7, iterations: int = 10) -> FlareResult:
    """Detect flare spots, build their mask and inpaint it.

    Images without detections are returned unchanged.
    """
    res = detect_and_mask(img, params)
    if res.mask.any():
        problem = InpaintProblem(res.image, res.mask, patch_side=patch_side,
                                 iterations=iterations, seed=seed)
        res.restored = solve(problem).image
    else:
        res.restored = res.image.copy()
    return res
