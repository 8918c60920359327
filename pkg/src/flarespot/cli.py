"""Command line entry point: ``flarespot {remove,detect,mask,inpaint,synth,eval}``.

Exit status is 0 on success, 1 when some input files failed and 2 on usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .detector import PipelineParams
from .errors import FlareSpotError, ManifestError
from .evaluate import GroundTruth, aggregate, read_manifest, score_image, write_report
from .inpaint import InpaintProblem, solve
from .io import normalized_png, overlay, read_image, read_mask, write_image, write_mask
from .lightsource import find_light_sources
from .pipeline import detect_and_mask
from .scalespace import build_scalespace

log = logging.getLogger("flarespot")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
CONFIG_KEYS = ("iota", "sigma_min", "sigma_max", "delta", "beta", "epsilon", "alpha")
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- configuration

def parse_config(text: str) -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"config line {n}: unknown key {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"config line {n}: {value!r} is not a number") from None
    return out


def build_params(args) -> PipelineParams:
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        return replace(PipelineParams(), **values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def collect_inputs(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES))
        else:
            out.append(p)
    return out


# --------------------------------------------------------------------------- reports

def detection_record(det) -> dict:
    c = det.candidate
    rec = {
        "source_centroid": [round(v, 6) for v in det.source.centroid],
        "source_area": det.source.area,
        "flare_point": list(det.flare_point),
        "scale": det.scale,
        "confidence": det.confidence,
    }
    if c is not None:
        rec["terms"] = {"e1": c.e1, "e2": c.e2, "e3": c.e3,
                        "e1n": c.e1n, "e2n": c.e2n, "e3n": c.e3n, "E": c.energy}
    return rec


def image_report(name: str, res, params: PipelineParams) -> dict:
    if res.detections:
        status = "flare detected"
    elif find_light_sources(res.lab, params.iota, params.secondary_ratio, params.opening_radius):
        status = "no flare"
    else:
        status = "no light source"
    return {"image": name, "status": status,
            "mask_area": int(res.mask.sum()) if res.mask is not None else 0,
            "detections": [detection_record(d) for d in res.detections]}


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def dump_debug(out_dir: Path, stem: str, res, params: PipelineParams) -> None:
    d = out_dir / f"{stem}_debug"
    write_image(d / "luminance.png", normalized_png(res.lab.L))
    try:
        ss = build_scalespace(res.lab.L, params.sigma_min, params.sigma_max, params.k)
        write_image(d / "dog_min.png", normalized_png(np.min(np.stack(ss.dogs), axis=0)))
    except FlareSpotError:
        pass
    for i, det in enumerate(res.detections):
        write_image(d / f"window_{i}.png",
                    overlay(res.image, det.window.mask(res.lab.shape), (0, 255, 0)))


# --------------------------------------------------------------------------- per-file jobs

def _process(job):
    """Run one image through the requested stages. Returns (name, report or None, error)."""
    mode, path, out_dir, params, opts = job
    path, out_dir = Path(path), Path(out_dir)
    stem = path.stem
    try:
        img = read_image(path)
    except Exception as exc:  # noqa: BLE001 - any decode failure skips the file
        return path.name, None, f"cannot decode {path}: {exc}"
    try:
        res = detect_and_mask(img, params)
        report = image_report(path.name, res, params)
        write_json(out_dir / f"{stem}.json", report)
        if opts.get("debug"):
            dump_debug(out_dir, stem, res, params)
        if mode in ("mask", "remove"):
            write_mask(out_dir / f"{stem}_mask.png", res.mask)
            if opts.get("overlay"):
                write_image(out_dir / f"{stem}_overlay.png", overlay(res.image, res.mask))
        if mode == "remove":
            restored = res.image
            if res.mask.any():
                problem = InpaintProblem(res.image, res.mask, patch_side=opts["patch_side"],
                                         iterations=opts["iterations"], seed=opts["seed"])
                restored = solve(problem).image
            write_image(out_dir / f"{stem}_restored.png", restored)
    except FlareSpotError as exc:
        return path.name, None, f"{path}: {exc}"
    return path.name, report, None


def run_batch(mode: str, args) -> int:
    params = build_params(args)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    inputs = collect_inputs(args.inputs)
    if not inputs:
        raise UsageError("no input images")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    opts = {"overlay": getattr(args, "overlay", False), "debug": args.debug,
            "seed": getattr(args, "seed", 0), "patch_side": getattr(args, "patch_side", 7),
            "iterations": getattr(args, "iterations", 10)}
    jobs = [(mode, str(p), str(out_dir), params, opts) for p in inputs]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_process, jobs))
    else:
        results = [_process(j) for j in jobs]
    failed = 0
    for name, report, err in results:
        if err:
            failed += 1
            log.error(err)
        else:
            log.info("%s: %s (%d detections)", name, report["status"], len(report["detections"]))
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------- subcommands

def cmd_inpaint(args) -> int:
    try:
        img = read_image(args.image)
        hole = read_mask(args.mask)
    except Exception as exc:  # noqa: BLE001
        log.error("cannot read inputs: %s", exc)
        return EXIT_PARTIAL
    try:
        problem = InpaintProblem(img, hole, patch_side=args.patch_side,
                                 iterations=args.iterations, seed=args.seed)
        write_image(args.output, solve(problem).image)
    except (FlareSpotError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthgen import write_corpus

    manifest = write_corpus(args.output, args.count, seed=args.seed,
                            dims=(args.width, args.height), with_flares=not args.no_flares)
    log.info("wrote %s", manifest)
    return EXIT_OK


def run_eval(manifest, out_dir, params: PipelineParams | None = None, detector=None):
    """Score detection and masks on every manifest row and write the report files.

    ``detector`` replaces :func:`detect_and_mask` (used to inject detections in tests).
    """
    params = params or PipelineParams()
    detector = detector or detect_and_mask
    scores = []
    for img_path, mask_path in read_manifest(manifest):
        img = read_image(img_path)
        gt_mask = read_mask(mask_path) if mask_path else np.zeros(img.shape[:2], dtype=bool)
        res = detector(img, params)
        name = img_path.relative_to(Path(manifest).parent).as_posix()
        scores.append(score_image(res.detections, res.mask, GroundTruth(gt_mask), name=name))
    report = aggregate(scores)
    write_report(report, out_dir)
    return report


def cmd_eval(args) -> int:
    report = run_eval(args.manifest, args.output, build_params(args))
    log.info("precision %.4f recall %.4f F %.4f avgFP %.4f", report.precision, report.recall,
             report.f_measure, report.avg_false_positives)
    return EXIT_OK


# --------------------------------------------------------------------------- parser

def _add_params(p):
    p.add_argument("--config", help="key=value parameter file")
    defaults = PipelineParams()
    for f in fields(PipelineParams):
        if f.name in CONFIG_KEYS:
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=float,
                           help=f"default {getattr(defaults, f.name)}")


def _add_batch(p, masks: bool, inpaint: bool):
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--debug", action="store_true", help="dump intermediate planes")
    _add_params(p)
    if masks:
        p.add_argument("--overlay", action="store_true", help="write mask outline overlays")
    if inpaint:
        _add_inpaint(p)


def _add_inpaint(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patch-side", dest="patch_side", type=int, default=7)
    p.add_argument("--iterations", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flarespot",
                                     description="Detect and remove flare spots in photographs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_batch(sub.add_parser("remove", help="detect, mask and inpaint flare spots"), True, True)
    _add_batch(sub.add_parser("detect", help="write detection reports only"), False, False)
    _add_batch(sub.add_parser("mask", help="write detection reports and masks"), True, False)

    p = sub.add_parser("inpaint", help="fill a masked region of one image")
    p.add_argument("image")
    p.add_argument("mask")
    p.add_argument("-o", "--output", required=True, help="output image path")
    _add_inpaint(p)

    p = sub.add_parser("synth", help="render a synthetic corpus with ground truth")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-n", "--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--no-flares", action="store_true", help="negative-control corpus")

    p = sub.add_parser("eval", help="score the pipeline against a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True)
    _add_params(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command in ("remove", "detect", "mask"):
            return run_batch(args.command, args)
        if args.command == "inpaint":
            return cmd_inpaint(args)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_eval(args)
    except (UsageError, ManifestError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
