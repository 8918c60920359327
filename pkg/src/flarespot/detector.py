"""Per-light-source flare spot candidate filtering and confidence selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfWindow
from .imagecore import LabImage, Window, normalize_window, rgb_to_lab
from .lightsource import LightSource, find_light_sources
from .morphology import bounded_flood_area
from .scalespace import Keypoint, build_scalespace, detect_keypoints, elongation_ok


@dataclass(frozen=True)
class PipelineParams:
    """Detection and mask parameters. Defaults are the fixed values of the method."""

    iota: float = 99.0
    sigma_min: float = 3.0
    sigma_max: float = 15.0
    delta: float = 10.0
    beta: float = 0.7
    epsilon: float = 5.0
    alpha: float = 0.2
    k: float = 2.0 ** (1.0 / 5.0)
    window_fraction: float = 0.2
    secondary_ratio: float = 0.8
    opening_radius: float = 1.5

    def __post_init__(self):
        for name in ("iota", "sigma_min", "sigma_max", "delta", "epsilon", "k",
                     "window_fraction", "secondary_ratio", "opening_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("alpha", "beta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class Candidate:
    keypoint: Keypoint
    e1: float
    e2: float
    e3: float
    e1n: float = 0.0
    e2n: float = 0.0
    e3n: float = 0.0

    @property
    def energy(self) -> float:
        return 0.5 * (self.e1n + self.e2n) - self.e3n

    @property
    def confidence(self) -> float:
        return math.exp(-self.energy)


@dataclass(frozen=True)
class FlareDetection:
    source: LightSource
    flare_point: tuple[int, int]
    scale: float
    confidence: float
    window: Window
    candidate: Candidate | None = field(default=None, repr=False)


def image_center(shape) -> tuple[float, float]:
    h, w = shape
    return (w - 1) / 2.0, (h - 1) / 2.0


def search_window(source: LightSource, dims, fraction: float = 0.2) -> Window:
    """Window around the point reflection of the source centroid through the image center.

    ``dims`` is ``(width, height)``; the radius is ``fraction * max(width, height)``.
    """
    w, h = dims
    xc, yc = (w - 1) / 2.0, (h - 1) / 2.0
    sx, sy = source.centroid
    cx = min(max(2 * xc - sx, 0.0), w - 1.0)
    cy = min(max(2 * yc - sy, 0.0), h - 1.0)
    return Window(center=(cx, cy), radius=fraction * max(w, h))


def bounded_area_ok(lab: LabImage, kp: Keypoint, source: LightSource, delta: float) -> bool:
    """True when the similar-brightness component around ``kp`` is under 1% of the source area."""
    limit = math.ceil(source.area / 100.0)
    if limit <= 0:
        return False
    x, y = kp.position
    L = lab.L
    h, w = L.shape
    # a component with fewer than `limit` pixels cannot leave this box
    x0, x1 = max(0, x - limit), min(w, x + limit + 1)
    y0, y1 = max(0, y - limit), min(h, y + limit + 1)
    crop = L[y0:y1, x0:x1]
    region = np.abs(crop - L[y, x]) <= delta
    area = bounded_flood_area(region, (x - x0, y - y0), limit)
    return area < source.area / 100.0


def overexposure_ok(norm: np.ndarray, kp: Keypoint, beta: float, window: Window | None = None) -> bool:
    """True when the window-normalized luminance at ``kp`` exceeds ``beta``."""
    if window is not None and not window.contains(kp.position):
        raise OutOfWindow(f"keypoint {kp.position} outside {window}")
    x, y = kp.position
    return bool(norm[y, x] > beta)


def confidence_terms(lab: LabImage, kp: Keypoint, source: LightSource) -> tuple[float, float, float]:
    """Raw (radial mismatch, distance to source-center line, L - a*) for a keypoint."""
    xc, yc = image_center(lab.shape)
    sx, sy = source.centroid
    x, y = kp.position
    r_source = math.hypot(xc - sx, yc - sy)
    r_kp = math.hypot(xc - x, yc - y)
    e1 = abs(r_source - r_kp)
    if r_source == 0.0:
        # no line through two coincident points: fall back to the radial distance
        e2 = r_kp
    else:
        cross = (xc - sx) * (y - sy) - (yc - sy) * (x - sx)
        e2 = abs(cross) / r_source
    e3 = float(lab.L[y, x] - lab.a[y, x])
    return e1, e2, e3


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def normalize_candidates(raw: list[Candidate]) -> list[Candidate]:
    """Min-max normalize each term separately over ``raw`` (constant terms become 0)."""
    if not raw:
        return []
    terms = np.array([[c.e1, c.e2, c.e3] for c in raw], dtype=np.float64)
    norm = np.column_stack([_minmax(terms[:, i]) for i in range(3)])
    return [Candidate(c.keypoint, c.e1, c.e2, c.e3, *map(float, n)) for c, n in zip(raw, norm)]


def best_candidate(cands: list[Candidate]) -> Candidate | None:
    """Candidate with the highest confidence; ties by smaller e1, then raster order."""
    if not cands:
        return None
    return min(cands, key=lambda c: (c.energy, c.e1, c.keypoint.position[1], c.keypoint.position[0]))


def select_flare(keypoints: list[Keypoint], lab: LabImage, source: LightSource,
                 window: Window | None = None) -> FlareDetection | None:
    """Pick the most flare-like keypoint among filtered candidates of one source."""
    raw = [Candidate(kp, *confidence_terms(lab, kp, source)) for kp in keypoints]
    best = best_candidate(normalize_candidates(raw))
    if best is None:
        return None
    if window is None:
        window = search_window(source, (lab.shape[1], lab.shape[0]))
    kp = best.keypoint
    return FlareDetection(source=source, flare_point=kp.position, scale=kp.sigma,
                          confidence=best.confidence, window=window, candidate=best)


def filter_candidates(keypoints, lab: LabImage, source: LightSource, window: Window,
                      params: PipelineParams) -> list[Keypoint]:
    """Apply window restriction, elongation, bounded area and overexposure in that order."""
    inside = [kp for kp in keypoints if window.contains(kp.position)]
    inside = [kp for kp in inside if elongation_ok(kp)]
    inside = [kp for kp in inside if bounded_area_ok(lab, kp, source, params.delta)]
    if not inside:
        return []
    norm = normalize_window(lab.L, window)
    return [kp for kp in inside if overexposure_ok(norm, kp, params.beta, window)]


def detect_all(img, params: PipelineParams | None = None,
               lab: LabImage | None = None) -> list[FlareDetection]:
    """Detect at most one flare spot per light source.

    Parameters
    ----------
    img : array_like, shape (H, W, 3)
        8-bit sRGB image. Ignored when ``lab`` is given.
    params : PipelineParams, optional
    lab : LabImage, optional
        Precomputed Lab conversion of ``img``.

    Returns
    -------
    list of FlareDetection
        Ordered like the light sources (largest first).
    """
    params = params or PipelineParams()
    if lab is None:
        lab = rgb_to_lab(img)
    sources = find_light_sources(lab, params.iota, params.secondary_ratio, params.opening_radius)
    if not sources:
        return []
    ss = build_scalespace(lab.L, params.sigma_min, params.sigma_max, params.k)
    keypoints = detect_keypoints(ss)
    dims = (lab.shape[1], lab.shape[0])
    detections = []
    for source in sources:
        window = search_window(source, dims, params.window_fraction)
        survivors = filter_candidates(keypoints, lab, source, window, params)
        det = select_flare(survivors, lab, source, window)
        if det is not None:
            detections.append(det)
    return detections
