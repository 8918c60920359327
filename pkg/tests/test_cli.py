import json
from types import SimpleNamespace

import numpy as np
import pytest

from flarespot.cli import main, parse_config, run_eval, UsageError
from flarespot.detector import PipelineParams
from flarespot.errors import ManifestError
from flarespot.evaluate import write_manifest
from flarespot.io import read_image, read_mask, write_image, write_mask
from flarespot.pipeline import detect_and_mask
from flarespot.synthgen import Background, FlareSpec, SceneSpec, SourceSpec, render


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    d = tmp_path_factory.mktemp("planted")
    src = SourceSpec(center=(110, 100), radius=60)
    flare = FlareSpec(center=(489, 299), radius=4.5, peak_L=92, a=-25, b=-10, falloff=1.4)
    img, gt = render(SceneSpec(dims=(600, 400), background=Background(L=35), sources=(src,),
                               flares=(flare,), noise_sigma=1 / 255, rng_seed=2))
    write_image(d / "flare.png", img)
    write_mask(d / "flare_gt.png", gt.flare_mask)
    write_image(d / "gray.png", np.full((120, 160, 3), 128, np.uint8))
    return d


def test_parse_config():
    assert parse_config("iota = 98\n# note\n\nalpha=0.3  # inline\n") == {"iota": 98.0, "alpha": 0.3}
    with pytest.raises(UsageError):
        parse_config("gamma = 1")
    with pytest.raises(UsageError):
        parse_config("iota = high")


def test_remove_end_to_end(planted, tmp_path):
    out = tmp_path / "out"
    assert main(["remove", str(planted / "flare.png"), str(planted / "gray.png"), "-o", str(out),
                 "--overlay"]) == 0
    rep = json.loads((out / "flare.json").read_text())
    assert rep["status"] == "flare detected" and len(rep["detections"]) == 1
    terms = rep["detections"][0]["terms"]
    assert set(terms) == {"e1", "e2", "e3", "e1n", "e2n", "e3n", "E"}
    mask = read_mask(out / "flare_mask.png")
    assert mask.any()
    original, restored = read_image(planted / "flare.png"), read_image(out / "flare_restored.png")
    np.testing.assert_array_equal(original[~mask], restored[~mask])
    assert (out / "flare_overlay.png").is_file()

    gray = json.loads((out / "gray.json").read_text())
    assert gray["status"] == "no light source" and gray["detections"] == []
    np.testing.assert_array_equal(read_image(out / "gray_restored.png"), read_image(planted / "gray.png"))


def test_corrupt_file_partial_failure(planted, tmp_path):
    bad = tmp_path / "broken.png"
    bad.write_bytes(b"not an image")
    out = tmp_path / "out"
    assert main(["detect", str(bad), str(planted / "gray.png"), "-o", str(out)]) == 1
    assert (out / "gray.json").is_file() and not (out / "broken.json").exists()


def test_config_and_override(planted, tmp_path):
    cfg = tmp_path / "params.cfg"
    cfg.write_text("iota = 101\n")
    out = tmp_path / "out"
    # no pixel reaches L >= 101, so the flare image reports no light source
    assert main(["detect", str(planted / "flare.png"), "-o", str(out), "--config", str(cfg)]) == 0
    assert json.loads((out / "flare.json").read_text())["status"] == "no light source"
    assert main(["detect", str(planted / "flare.png"), "-o", str(out), "--config", str(cfg),
                 "--iota", "99"]) == 0
    assert json.loads((out / "flare.json").read_text())["status"] == "flare detected"


@pytest.mark.parametrize("argv", [
    ["detect", "x.png", "-o", "out", "--beta", "3"],
    ["detect", "x.png", "-o", "out", "--workers", "0"],
    ["frobnicate"],
    ["remove"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense\n")
    assert main(["detect", "x.png", "-o", str(tmp_path), "--config", str(cfg)]) == 2


def test_mask_debug_and_workers(planted, tmp_path):
    out = tmp_path / "out"
    assert main(["mask", str(planted), "-o", str(out), "--debug", "--workers", "2"]) == 0
    assert (out / "flare_mask.png").is_file() and (out / "gray_mask.png").is_file()
    assert (out / "flare_debug" / "dog_min.png").is_file()
    assert (out / "flare_debug" / "window_0.png").is_file()


def test_inpaint_subcommand(tmp_path):
    img = np.zeros((64, 64, 3), np.uint8)
    img[:, 32:] = 200
    hole = np.zeros((64, 64), bool)
    hole[28:36, 28:36] = True
    damaged = img.copy()
    damaged[hole] = 255
    write_image(tmp_path / "in.png", damaged)
    write_mask(tmp_path / "hole.png", hole)
    assert main(["inpaint", str(tmp_path / "in.png"), str(tmp_path / "hole.png"),
                 "-o", str(tmp_path / "out.png")]) == 0
    out = read_image(tmp_path / "out.png")
    np.testing.assert_array_equal(out, img)


def test_synth_and_eval(tmp_path):
    assert main(["synth", "-o", str(tmp_path / "c"), "-n", "2", "--width", "400", "--height",
                 "300", "--seed", "5"]) == 0
    assert main(["eval", str(tmp_path / "c" / "manifest.csv"), "-o", str(tmp_path / "r")]) == 0
    rep = json.loads((tmp_path / "r" / "report.json").read_text())
    assert rep["precision"] == 1.0 and rep["recall"] == 1.0
    assert (tmp_path / "r" / "fp_histogram.csv").is_file()


def test_eval_with_injected_detection(tmp_path):
    write_image(tmp_path / "plain.png", np.full((40, 40, 3), 90, np.uint8))
    write_manifest(tmp_path / "m.csv", [("plain.png", None)])

    def fake(img, params):
        det = SimpleNamespace(flare_point=(5, 5), confidence=1.0)
        return SimpleNamespace(detections=[det], mask=np.zeros(img.shape[:2], bool))

    rep = run_eval(tmp_path / "m.csv", tmp_path / "r", PipelineParams(), detector=fake)
    assert rep.avg_false_positives == 1.0 and rep.fp_histogram[1] == 100.0
    assert "1,100.0000" in (tmp_path / "r" / "fp_histogram.csv").read_text()


def test_eval_empty_manifest(tmp_path):
    (tmp_path / "m.csv").write_text("image,mask\n")
    with pytest.raises(ManifestError):
        run_eval(tmp_path / "m.csv", tmp_path / "r")
    assert main(["eval", str(tmp_path / "m.csv"), "-o", str(tmp_path / "r")]) == 2


def test_detect_and_mask_agrees_with_cli(planted, tmp_path):
    res = detect_and_mask(read_image(planted / "flare.png"))
    main(["mask", str(planted / "flare.png"), "-o", str(tmp_path)])
    np.testing.assert_array_equal(read_mask(tmp_path / "flare_mask.png"), res.mask)
