"""Bright light source localization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import LabImage
from .morphology import Component, connected_components, opening, upper_level_set

MAX_SOURCES = 8


@dataclass(frozen=True)
class LightSource:
    region: Component
    centroid: tuple[float, float]
    area: int


def bright_mask(L: np.ndarray, iota: float = 99.0, opening_radius: float = 1.5) -> np.ndarray:
    """Upper level set of the luminance after speck removal by opening."""
    return opening(upper_level_set(L, iota), opening_radius)


def find_light_sources(lab: LabImage, iota: float = 99.0, secondary_ratio: float = 0.8,
                       opening_radius: float = 1.5,
                       max_sources: int = MAX_SOURCES) -> list[LightSource]:
    """Locate the main light source and any comparably large secondary ones.

    The largest component of the opened bright set is always kept; others are
    kept when their area is at least ``secondary_ratio`` times the largest.
    At most ``max_sources`` are returned, largest first. An image without
    pixels at ``L >= iota`` gives an empty list.
    """
    if not 0.0 < secondary_ratio <= 1.0:
        raise ValueError("secondary_ratio must lie in (0, 1]")
    comps = connected_components(bright_mask(lab.L, iota, opening_radius))
    if not comps:
        return []
    main_area = comps[0].area
    keep = [c for c in comps if c.area >= secondary_ratio * main_area][:max_sources]
    return [LightSource(region=c, centroid=c.centroid, area=c.area) for c in keep]
