#!/usr/bin/env python
"""Fill a hole with patch non-local medians and watch the energy go down."""
import numpy as np

from flarespot.inpaint import InpaintProblem, solve

yy, xx = np.mgrid[:96, :96]
stripes = ((xx + yy) // 6 % 2).astype(np.uint8)
img = np.dstack([60 + 150 * stripes, 90 + 0 * stripes, 200 - 120 * stripes]).astype(np.uint8)

hole = np.zeros((96, 96), bool)
hole[40:58, 30:50] = True
damaged = img.copy()
damaged[hole] = 255

res = solve(InpaintProblem(damaged, hole, seed=1))
err = np.abs(res.image.astype(int) - img.astype(int))[hole]
print("levels used:", res.levels)
print("finest-level energy:", [round(e) for e in res.energy_history])
print("max abs error in hole:", err.max(), " mean:", err.mean().round(3))
print("known pixels untouched:", np.array_equal(res.image[~hole], img[~hole]))
