"""Synthetic flare scenes with exact ground truth.

A scene is a Lab background, saturated light-source discs and bluish-green
flare blobs placed near the point reflection of each source through the
image center. Flares have a flat core and a Gaussian shoulder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import SpecOutOfGamut
from .evaluate import GroundTruth, write_manifest
from .imagecore import lab_to_rgb_float
from .io import write_image, write_mask

GT_MIN_RISE = 2.0        # L units a flare must add for a pixel to be ground truth
SOURCE_OVEREXPOSURE = 1.08  # linear-ish RGB value of source cores before clipping
GAMUT_TOL = 1e-6
MIN_CONTRAST = 35.0     # min flare peak L above background
SOURCE_MARGIN = 1.1


@dataclass(frozen=True)
class Background:
    kind: str = "flat"          # flat | gradient | texture
    L: float = 40.0
    a: float = 0.0
    b: float = 0.0
    amplitude: float = 0.0      # L half-range of gradient/texture
    angle: float = 0.0          # gradient direction, radians
    seed: int = 0               # texture seed
    correlation: float = 6.0    # texture smoothness, px


@dataclass(frozen=True)
class SourceSpec:
    center: tuple[float, float]
    radius: float
    L: float = 100.0


@dataclass(frozen=True)
class FlareSpec:
    center: tuple[float, float]
    radius: float              # flat core radius, px
    peak_L: float
    a: float
    b: float
    falloff: float             # Gaussian shoulder sigma, px


@dataclass(frozen=True)
class SceneSpec:
    dims: tuple[int, int]      # (width, height)
    background: Background = field(default_factory=Background)
    sources: tuple = ()
    flares: tuple = ()
    noise_sigma: float = 0.0   # in [0, 1] RGB units
    rng_seed: int = 0


def _background(spec: SceneSpec) -> np.ndarray:
    w, h = spec.dims
    bg = spec.background
    L = np.full((h, w), bg.L, dtype=np.float64)
    if bg.kind == "gradient":
        yy, xx = np.mgrid[:h, :w]
        t = (xx - (w - 1) / 2) * math.cos(bg.angle) + (yy - (h - 1) / 2) * math.sin(bg.angle)
        L += bg.amplitude * t / (0.5 * math.hypot(w, h))
    elif bg.kind == "texture":
        field_ = ndimage.gaussian_filter(np.random.default_rng(bg.seed).standard_normal((h, w)),
                                         bg.correlation, mode="wrap")
        L += bg.amplitude * field_ / np.abs(field_).max()
    elif bg.kind != "flat":
        raise ValueError(f"unknown background kind {bg.kind!r}")
    return np.stack([L, np.full_like(L, bg.a), np.full_like(L, bg.b)], axis=-1)


def flare_profile(dist: np.ndarray, radius: float, falloff: float) -> np.ndarray:
    """1 inside the core, Gaussian decay outside it."""
    out = np.exp(-np.maximum(dist - radius, 0.0) ** 2 / (2.0 * falloff ** 2))
    return out


def render(spec: SceneSpec) -> tuple[np.ndarray, GroundTruth]:
    """Render ``spec`` to an 8-bit RGB image plus its flare ground truth.

    Raises
    ------
    SpecOutOfGamut
        If a flare's peak color is not representable in sRGB.
    """
    w, h = spec.dims
    lab = _background(spec)
    base_L = lab[..., 0].copy()
    yy, xx = np.mgrid[:h, :w].astype(np.float64)
    for f in spec.flares:
        if f.a >= 0:
            raise ValueError("flare a* must be negative")
        peak = lab_to_rgb_float(np.array([f.peak_L, f.a, f.b]))
        if peak.min() < -GAMUT_TOL or peak.max() > 1 + GAMUT_TOL:
            raise SpecOutOfGamut(f"flare color {(f.peak_L, f.a, f.b)} outside sRGB")
        g = flare_profile(np.hypot(xx - f.center[0], yy - f.center[1]), f.radius, f.falloff)
        target = np.array([f.peak_L, f.a, f.b])
        lab += g[..., None] * (target - lab)
    gt_mask = lab[..., 0] - base_L >= GT_MIN_RISE

    rgb = lab_to_rgb_float(lab)
    for s in spec.sources:
        dist = np.hypot(xx - s.center[0], yy - s.center[1])
        cover = np.clip(s.radius + 0.5 - dist, 0.0, 1.0)[..., None]
        level = SOURCE_OVEREXPOSURE * s.L / 100.0
        rgb = (1 - cover) * rgb + cover * level
        gt_mask &= cover[..., 0] == 0
    if spec.noise_sigma > 0:
        rgb = rgb + np.random.default_rng(spec.rng_seed).normal(0.0, spec.noise_sigma, rgb.shape)
    img = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    points = tuple((int(round(f.center[0])), int(round(f.center[1]))) for f in spec.flares)
    return img, GroundTruth(flare_mask=gt_mask, flare_points=points)


# --------------------------------------------------------------------------- random scenes

def _in_gamut(L, a, b) -> bool:
    rgb = lab_to_rgb_float(np.array([L, a, b]))
    return rgb.min() >= 0 and rgb.max() <= 1


def random_flare(rng: np.random.Generator, center) -> FlareSpec:
    """Draw a flare color/shape; colors are resampled until they fit in sRGB."""
    while True:
        L = rng.uniform(80, 98)
        a = rng.uniform(-40, -5)
        b = rng.uniform(-30, 30)
        if _in_gamut(L, a, b):
            break
    return FlareSpec(center=tuple(center), radius=rng.uniform(3.5, 5.5), peak_L=L, a=a, b=b,
                     falloff=rng.uniform(1.0, 1.8))


def _core_radius(f: FlareSpec, bg_L: float, delta: float = 10.0) -> float:
    """Radius inside which flare luminance stays within ``delta`` of its peak."""
    amp = f.peak_L - bg_L
    if amp <= delta:
        return float("inf")
    return f.radius + f.falloff * math.sqrt(2 * math.log(amp / (amp - delta)))


def _place_sources(rng, dims, radii, clearance, tries: int = 10_000):
    """Rejection-sample source centers inside the frame.

    Each source stays ``clearance`` away from every mirror point (its own and
    the others'), sources do not touch, and mirror points stay apart.
    """
    w, h = dims
    xc, yc = (w - 1) / 2, (h - 1) / 2
    for _ in range(tries):
        pts = [(rng.uniform(r + 2, w - r - 3), rng.uniform(r + 2, h - r - 3)) for r in radii]
        mirrors = [(2 * xc - x, 2 * yc - y) for x, y in pts]
        ok = all(math.dist(p, m) > clearance + r for p, r in zip(pts, radii) for m in mirrors)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                ok &= math.dist(pts[i], pts[j]) > radii[i] + radii[j] + 4
                ok &= math.dist(mirrors[i], mirrors[j]) > clearance
        if ok:
            return pts
    raise ValueError(f"cannot place {len(radii)} sources of radius {max(radii):.0f} in {dims}")


def random_scene(rng: np.random.Generator, dims=(800, 600), n_sources: int = 1,
                 background: str = "flat", with_flares: bool = True,
                 noise_sigma: float | None = None, jitter: float = 0.05) -> SceneSpec:
    """Draw a random scene whose flares sit near the mirror image of each source.

    Source discs are sized so that each flare's similar-brightness core stays
    well below one hundredth of the source area.
    """
    w, h = dims
    xc, yc = (w - 1) / 2, (h - 1) / 2
    max_jitter = jitter * max(w, h)
    flares_proto = [random_flare(rng, (0.0, 0.0)) for _ in range(n_sources)]

    # keep every flare at least MIN_CONTRAST above the brightest background
    if background == "gradient":
        amp = rng.uniform(5, 12)
    elif background == "texture":
        amp = rng.uniform(4, 7)
    else:
        amp = 0.0
    top = min(f.peak_L for f in flares_proto) - MIN_CONTRAST - amp
    bg_L = rng.uniform(25, max(25.0, min(50.0, top)))
    a, b = rng.uniform(-3, 3), rng.uniform(-3, 8)
    if background == "flat":
        bg = Background("flat", L=bg_L, a=a, b=b)
    elif background == "gradient":
        bg = Background("gradient", L=bg_L, a=a, b=b, amplitude=amp,
                        angle=rng.uniform(0, 2 * math.pi))
    else:
        bg = Background("texture", L=bg_L, a=a, b=b, amplitude=amp,
                        seed=int(rng.integers(2 ** 31)), correlation=rng.uniform(4, 8))

    core = max(_core_radius(f, bg_L + amp) for f in flares_proto)
    # margin on the 1%-of-source-area rule for discretization and noise
    r_source = max(0.09 * min(w, h), SOURCE_MARGIN * 10.0 * (core + 0.7))
    radii = [r_source] + [r_source * rng.uniform(0.95, 1.0) for _ in range(n_sources - 1)]

    window_r = 0.2 * max(w, h)
    centers = _place_sources(rng, dims, radii, window_r + max_jitter)
    sources, flares = [], []
    for (sx, sy), r_s, proto in zip(centers, radii, flares_proto):
        sources.append(SourceSpec(center=(sx, sy), radius=r_s))
        if with_flares:
            j = rng.uniform(0, max_jitter)
            ja = rng.uniform(0, 2 * math.pi)
            fx = min(max(2 * xc - sx + j * math.cos(ja), 12), w - 13)
            fy = min(max(2 * yc - sy + j * math.sin(ja), 12), h - 13)
            flares.append(FlareSpec(center=(fx, fy), radius=proto.radius, peak_L=proto.peak_L,
                                    a=proto.a, b=proto.b, falloff=proto.falloff))
    if noise_sigma is None:
        noise_sigma = rng.uniform(0, 2.0) / 255.0
    return SceneSpec(dims=(w, h), background=bg, sources=tuple(sources), flares=tuple(flares),
                     noise_sigma=noise_sigma, rng_seed=int(rng.integers(2 ** 31)))


def scene_corpus(n: int, seed: int = 0, dims=(800, 600), with_flares: bool = True) -> list[SceneSpec]:
    """Deterministic list of ``n`` scenes cycling through background kinds and 1-2 sources."""
    rng = np.random.default_rng(seed)
    kinds = ("flat", "gradient", "texture")
    return [random_scene(rng, dims, n_sources=1 + (i // 3) % 2, background=kinds[i % 3],
                         with_flares=with_flares) for i in range(n)]


def write_corpus(out_dir, n: int, seed: int = 0, dims=(800, 600), with_flares: bool = True) -> Path:
    """Render a corpus to ``out_dir`` (images/, masks/, manifest.csv)."""
    out_dir = Path(out_dir)
    rows = []
    for i, spec in enumerate(scene_corpus(n, seed, dims, with_flares)):
        img, gt = render(spec)
        name = f"scene_{i:04d}.png"
        write_image(out_dir / "images" / name, img)
        write_mask(out_dir / "masks" / name, gt.flare_mask)
        rows.append((f"images/{name}", f"masks/{name}"))
    manifest = out_dir / "manifest.csv"
    write_manifest(manifest, rows)
    return manifest
