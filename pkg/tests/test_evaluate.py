from types import SimpleNamespace

import numpy as np
import pytest

from flarespot.errors import BothEmpty, ManifestError
from flarespot.evaluate import (GroundTruth, ImageScore, aggregate, dice, fp_histogram,
                                match_detections, precision_recall_f, read_manifest,
                                score_image, write_manifest, write_report)


def det(x, y, conf=1.0):
    return SimpleNamespace(flare_point=(x, y), confidence=conf)


def blob_gt(*boxes, shape=(30, 30)):
    m = np.zeros(shape, dtype=bool)
    for y0, x0, s in boxes:
        m[y0:y0 + s, x0:x0 + s] = True
    return GroundTruth(flare_mask=m)


def test_match_examples():
    gt = blob_gt((5, 5, 6))
    assert match_detections([det(7, 7)], gt) == (1, 0, 0)
    assert match_detections([det(7, 7), det(8, 8)], gt) == (1, 1, 0)
    assert match_detections([], gt) == (0, 0, 1)


def test_match_outside_and_two_blobs():
    gt = blob_gt((2, 2, 4), (20, 20, 4))
    assert match_detections([det(21, 21), det(15, 15)], gt) == (1, 1, 1)
    assert match_detections([det(3, 3, 0.5), det(22, 22, 0.9)], gt) == (2, 0, 0)


def test_match_diagonal_blob_is_one_component():
    m = np.zeros((10, 10), bool)
    m[2, 2] = m[3, 3] = True
    assert match_detections([det(2, 2), det(3, 3)], GroundTruth(m)) == (1, 1, 0)


@pytest.mark.parametrize("counts, expected", [
    ((2, 1, 1), (2 / 3, 2 / 3, 2 / 3)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
    ((5, 0, 0), (1.0, 1.0, 1.0)),
    ((0, 3, 0), (0.0, 0.0, 0.0)),
    ((3, 1, 0), (0.75, 1.0, 6 / 7)),
])
def test_precision_recall_f(counts, expected):
    assert precision_recall_f(*counts) == pytest.approx(expected)


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        precision_recall_f(-1, 0, 0)


def test_dice_examples():
    a = np.zeros((20, 20), bool)
    a[:5, :20] = True           # 100
    assert dice(a, a) == 1.0
    assert dice(a, np.roll(a, 10, axis=0)) == 0.0
    b = np.zeros((20, 20), bool)
    b[:5, 10:20] = True
    b[10:15, :10] = True        # 100, overlap 50
    assert dice(a, b) == 0.5 == dice(b, a)
    with pytest.raises(BothEmpty):
        dice(np.zeros((3, 3)), np.zeros((3, 3)))


def test_aggregate_single_image():
    rep = aggregate([ImageScore(1, 0, 0, 0.8)])
    assert (rep.precision, rep.recall, rep.avg_false_positives, rep.avg_dice) == (1, 1, 0, 0.8)


def test_aggregate_fp_histogram():
    rep = aggregate([ImageScore(0, 0, 0), ImageScore(0, 2, 0)])
    assert rep.avg_false_positives == 1
    assert rep.fp_histogram[0] == 50 and rep.fp_histogram[2] == 50
    assert sum(rep.fp_histogram.values()) == pytest.approx(100)


def test_aggregate_dice_only_with_true_positive():
    rep = aggregate([ImageScore(1, 0, 0, 0.9), ImageScore(0, 1, 1, 0.1), ImageScore(1, 0, 0, 0.7)])
    assert rep.avg_dice == pytest.approx(0.8) and rep.median_dice == pytest.approx(0.8)
    assert rep.precision == pytest.approx(2 / 3) and rep.recall == pytest.approx(2 / 3)


def test_aggregate_pools_counts():
    scores = [ImageScore(1, 0, 3), ImageScore(9, 1, 0)]
    rep = aggregate(scores)
    assert rep.precision == pytest.approx(10 / 11) and rep.recall == pytest.approx(10 / 13)


def test_histogram_last_bin_collects_many():
    h = fp_histogram([0, 15, 40, 3])
    assert len(h) == 16 and h[15] == 50 and h[0] == 25 and h[3] == 25


def test_score_image_no_masks():
    s = score_image([], np.zeros((5, 5), bool), GroundTruth(np.zeros((5, 5), bool)))
    assert (s.tp, s.fp, s.fn, s.dice) == (0, 0, 0, None)


def test_manifest_round_trip(tmp_path):
    (tmp_path / "a.png").write_bytes(b"x")
    (tmp_path / "m.png").write_bytes(b"x")
    (tmp_path / "b.png").write_bytes(b"x")
    write_manifest(tmp_path / "list.csv", [("a.png", "m.png"), ("b.png", None)])
    rows = read_manifest(tmp_path / "list.csv")
    assert rows == [(tmp_path / "a.png", tmp_path / "m.png"), (tmp_path / "b.png", None)]


def test_manifest_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("image,mask\n")
    with pytest.raises(ManifestError):
        read_manifest(empty)
    with pytest.raises(ManifestError):
        read_manifest(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("image,mask\nnothere.png,\n")
    with pytest.raises(ManifestError):
        read_manifest(bad)


def test_write_report(tmp_path):
    rep = aggregate([ImageScore(1, 0, 0, 0.8), ImageScore(0, 16, 0)])
    rpath, hpath = write_report(rep, tmp_path)
    assert '"precision"' in rpath.read_text()
    lines = hpath.read_text().splitlines()
    assert lines[0] == "false_positives,percent_images" and lines[-1] == "15+,50.0000"
