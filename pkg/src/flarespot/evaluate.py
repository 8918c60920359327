"""Detection and mask-quality scoring against ground truth."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import BothEmpty, ManifestError
from .morphology import EIGHT

FP_HIST_BINS = 16  # 0..14 and a final "15+" bin


@dataclass(frozen=True)
class GroundTruth:
    flare_mask: np.ndarray
    flare_points: tuple = ()


@dataclass(frozen=True)
class ImageScore:
    tp: int
    fp: int
    fn: int
    dice: float | None = None
    name: str = ""


@dataclass
class EvalReport:
    per_image: list
    precision: float
    recall: float
    f_measure: float
    avg_false_positives: float
    avg_dice: float | None
    median_dice: float | None
    fp_histogram: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fp_histogram"] = {str(k): v for k, v in self.fp_histogram.items()}
        return d


def match_detections(detections, gt: GroundTruth) -> tuple[int, int, int]:
    """Greedy one-to-one matching of detections to ground-truth components.

    Detections are visited by decreasing confidence; a detection is a true
    positive when its flare point falls in a not-yet-claimed 8-connected
    component of the ground-truth mask.
    """
    labels, n = ndimage.label(np.asarray(gt.flare_mask, dtype=bool), structure=EIGHT)
    claimed = set()
    tp = 0
    for det in sorted(detections, key=lambda d: -d.confidence):
        x, y = det.flare_point
        lab = labels[y, x]
        if lab > 0 and lab not in claimed:
            claimed.add(lab)
            tp += 1
    return tp, len(detections) - tp, n - len(claimed)


def precision_recall_f(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and their harmonic mean; any 0/0 evaluates to 0."""
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def dice(m, gt) -> float:
    m = np.asarray(m, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if m.shape != gt.shape:
        raise ValueError("mask shapes differ")
    total = int(m.sum()) + int(gt.sum())
    if total == 0:
        raise BothEmpty("Dice is undefined for two empty masks")
    return 2.0 * int((m & gt).sum()) / total


def fp_histogram(fp_counts) -> dict[int, float]:
    """Percentage of images per false-positive count; the last bin collects 15 or more."""
    counts = np.minimum(np.asarray(fp_counts, dtype=int), FP_HIST_BINS - 1)
    hist = np.bincount(counts, minlength=FP_HIST_BINS)
    return {i: 100.0 * float(hist[i]) / len(counts) for i in range(FP_HIST_BINS)}


def aggregate(scores: list[ImageScore]) -> EvalReport:
    """Pool counts across images; Dice statistics only over images with a true positive."""
    if not scores:
        raise ValueError("nothing to aggregate")
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    p, r, f = precision_recall_f(tp, fp, fn)
    dices = [s.dice for s in scores if s.tp > 0 and s.dice is not None]
    return EvalReport(
        per_image=[asdict(s) for s in scores],
        precision=p,
        recall=r,
        f_measure=f,
        avg_false_positives=fp / len(scores),
        avg_dice=float(np.mean(dices)) if dices else None,
        median_dice=float(np.median(dices)) if dices else None,
        fp_histogram=fp_histogram([s.fp for s in scores]),
    )


def score_image(detections, mask, gt: GroundTruth, name: str = "") -> ImageScore:
    tp, fp, fn = match_detections(detections, gt)
    try:
        d = dice(mask, gt.flare_mask)
    except BothEmpty:
        d = None
    return ImageScore(tp=tp, fp=fp, fn=fn, dice=d, name=name)


# --------------------------------------------------------------------------- files

def read_manifest(path) -> list[tuple[Path, Path | None]]:
    """Read a CSV manifest with ``image`` and ``mask`` columns.

    Relative paths resolve against the manifest's directory. An empty
    ``mask`` cell means the image has no flare.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not rows:
        raise ManifestError(f"manifest {path} lists no images")
    out = []
    for i, row in enumerate(rows):
        if "image" not in row or not row["image"]:
            raise ManifestError(f"row {i + 1}: missing image column")
        img = path.parent / row["image"]
        mask = path.parent / row["mask"] if row.get("mask") else None
        for p in (img, mask):
            if p is not None and not p.is_file():
                raise ManifestError(f"row {i + 1}: {p} does not exist")
        out.append((img, mask))
    return out


def write_manifest(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image", "mask"])
        for img, mask in rows:
            writer.writerow([img, mask or ""])


def write_report(report: EvalReport, out_dir) -> tuple[Path, Path]:
    """Write ``report.json`` and ``fp_histogram.csv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rpath = out_dir / "report.json"
    rpath.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    hpath = out_dir / "fp_histogram.csv"
    with open(hpath, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["false_positives", "percent_images"])
        for k, v in report.fp_histogram.items():
            writer.writerow([f"{k}+" if k == FP_HIST_BINS - 1 else k, f"{v:.4f}"])
    return rpath, hpath
