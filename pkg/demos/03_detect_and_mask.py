#!/usr/bin/env python
"""Detect flare spots, grow their masks and compare with the planted ground truth."""
import sys
from pathlib import Path

import numpy as np

from flarespot.evaluate import dice, score_image
from flarespot.io import overlay, write_image, write_mask
from flarespot.pipeline import detect_and_mask
from flarespot.synthgen import random_scene, render

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
spec = random_scene(np.random.default_rng(12), n_sources=1, background="texture")
img, gt = render(spec)

res = detect_and_mask(img)
for d in res.detections:
    c = d.candidate
    print("flare at %s scale %.2f confidence %.3f (e1=%.2f e2=%.2f e3=%.1f)"
          % (d.flare_point, d.scale, d.confidence, c.e1, c.e2, c.e3))
print("truth at", gt.flare_points)
print("mask area", int(res.mask.sum()), "truth area", int(gt.flare_mask.sum()),
      "Dice %.3f" % dice(res.mask, gt.flare_mask))
print(score_image(res.detections, res.mask, gt))

write_image(out / "scene.png", img)
write_mask(out / "mask.png", res.mask)
write_image(out / "overlay.png", overlay(img, res.mask))
print("wrote", out)
