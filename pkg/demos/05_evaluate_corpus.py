#!/usr/bin/env python
"""Score the detector on a small synthetic corpus, with and without flares."""
import time

from flarespot.evaluate import aggregate, score_image
from flarespot.pipeline import detect_and_mask
from flarespot.synthgen import render, scene_corpus

for with_flares in (True, False):
    scores, t0 = [], time.perf_counter()
    for i, spec in enumerate(scene_corpus(12, seed=21, with_flares=with_flares)):
        img, gt = render(spec)
        res = detect_and_mask(img)
        scores.append(score_image(res.detections, res.mask, gt, name=str(i)))
    rep = aggregate(scores)
    print("flares" if with_flares else "negatives",
          "P=%.3f R=%.3f F=%.3f avgFP=%.3f" % (rep.precision, rep.recall, rep.f_measure,
                                               rep.avg_false_positives),
          "Dice mean/median:", rep.avg_dice and round(rep.avg_dice, 3),
          rep.median_dice and round(rep.median_dice, 3),
          "(%.2fs/image)" % ((time.perf_counter() - t0) / len(scores)))
