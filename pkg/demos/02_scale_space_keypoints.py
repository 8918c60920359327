#!/usr/bin/env python
"""Bright blobs show up as minima of the difference-of-Gaussians stack."""
import numpy as np

from flarespot.scalespace import build_scalespace, detect_keypoints, elongation_ok

yy, xx = np.mgrid[:160, :240].astype(float)
img = 20 + 60 * np.exp(-((xx - 60) ** 2 + (yy - 80) ** 2) / (2 * 4.0 ** 2))        # small round blob
img += 60 * np.exp(-((xx - 160) ** 2 + (yy - 80) ** 2) / (2 * 8.0 ** 2))           # larger round blob
img += 40 * np.exp(-(xx - 215) ** 2 / (2 * 2.5 ** 2) - (yy - 80) ** 2 / (2 * 30 ** 2))  # ridge

ss = build_scalespace(img)
print("sigmas:", np.round(ss.sigmas, 2))
kps = detect_keypoints(ss)
print(len(kps), "keypoints")
for kp in sorted(kps, key=lambda k: k.response)[:6]:
    l1, l2 = kp.hessian_eig
    print("  at %-10s sigma %5.2f  D %+.3f  ratio %6.2f  round=%s"
          % (kp.position, kp.sigma, kp.response, l2 / l1 if l1 > 0 else np.inf, elongation_ok(kp)))
# the scale of the strongest response grows with blob size; the ridge fails the shape test
