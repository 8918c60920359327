#!/usr/bin/env python
"""Render a synthetic flare scene and locate its light sources."""
import numpy as np

from flarespot.imagecore import rgb_to_lab
from flarespot.lightsource import find_light_sources
from flarespot.synthgen import random_scene, render

rng = np.random.default_rng(3)
spec = random_scene(rng, dims=(800, 600), n_sources=2, background="gradient")
img, gt = render(spec)
print("image", img.shape, img.dtype)
print("planted flare centers:", [tuple(round(v, 1) for v in f.center) for f in spec.flares])

lab = rgb_to_lab(img)
print("L range: %.1f .. %.1f" % (lab.L.min(), lab.L.max()))

# saturated discs survive the opening; both are comparable in size so both are kept
for s in find_light_sources(lab):
    print("source at (%.1f, %.1f) area %d" % (s.centroid + (s.area,)))
