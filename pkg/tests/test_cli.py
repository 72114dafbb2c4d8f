import json

import numpy as np
import pytest

from lumen.cli import run_cli
from lumen.png_io import load_image, load_mask, save_image, save_mask
from lumen.raster import BinaryMask, RasterImage


@pytest.fixture()
def workspace(tmp_path):
    rng = np.random.default_rng(0)
    data = np.full((24, 24), 0.2)
    data[:, 12:] = 0.8
    save_image(RasterImage(data), tmp_path / "img.png")

    noisy = RasterImage(rng.random((24, 24, 3)))
    save_image(noisy, tmp_path / "noisy.png")

    bits = np.zeros((24, 24), bool)
    bits[8:14, 9:15] = True
    save_mask(BinaryMask(bits), tmp_path / "mask.png")

    full = BinaryMask(np.ones((24, 24), bool))
    save_mask(full, tmp_path / "all_true.png")
    return tmp_path


def test_detect_writes_mask(workspace, capsys):
    rc = run_cli(
        [
            "detect",
            "--input", str(workspace / "img.png"),
            "--seed", "2,3",
            "--tolerance", "0.1",
            "--output", str(workspace / "out_mask.png"),
        ]
    )
    assert rc == 0
    mask = load_mask(workspace / "out_mask.png")
    assert mask.bits[:, :12].all() and not mask.bits[:, 12:].any()


def test_unknown_flag_usage_error(capsys):
    rc = run_cli(["detect", "--nope"])
    assert rc == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_bad_seed_format_usage_error(workspace, capsys):
    rc = run_cli(
        [
            "detect",
            "--input", str(workspace / "img.png"),
            "--seed", "12",
            "--tolerance", "0.1",
            "--output", str(workspace / "m.png"),
        ]
    )
    assert rc == 1


def test_inpaint_all_true_mask_processing_error(workspace, capsys):
    rc = run_cli(
        [
            "inpaint",
            "--method", "harmonic",
            "--input", str(workspace / "img.png"),
            "--mask", str(workspace / "all_true.png"),
            "--output", str(workspace / "out.png"),
        ]
    )
    assert rc == 2
    assert "entire image" in capsys.readouterr().err


def test_missing_input_processing_error(workspace):
    rc = run_cli(
        [
            "inpaint",
            "--method", "harmonic",
            "--input", str(workspace / "missing.png"),
            "--mask", str(workspace / "mask.png"),
            "--output", str(workspace / "out.png"),
        ]
    )
    assert rc == 2


def test_refuses_overwriting_input(workspace, capsys):
    rc = run_cli(
        [
            "inpaint",
            "--method", "harmonic",
            "--input", str(workspace / "img.png"),
            "--mask", str(workspace / "mask.png"),
            "--output", str(workspace / "img.png"),
        ]
    )
    assert rc == 1
    assert "force" in capsys.readouterr().err


def test_force_allows_overwrite(workspace):
    rc = run_cli(
        [
            "inpaint",
            "--method", "harmonic",
            "--input", str(workspace / "img.png"),
            "--mask", str(workspace / "mask.png"),
            "--output", str(workspace / "img.png"),
            "--force",
        ]
    )
    assert rc == 0


def test_inpaint_reproducible_and_report_round_trips(workspace):
    report_path = workspace / "report.json"
    args = [
        "inpaint",
        "--method", "tv",
        "--input", str(workspace / "noisy.png"),
        "--mask", str(workspace / "mask.png"),
        "--tv-epsilon", "0.01",
        "--tv-outer-iters", "5",
    ]
    assert run_cli(args + ["--output", str(workspace / "a.png"),
                           "--json-report", str(report_path)]) == 0
    assert run_cli(args + ["--output", str(workspace / "b.png")]) == 0
    assert (workspace / "a.png").read_bytes() == (workspace / "b.png").read_bytes()

    report = json.loads(report_path.read_text())
    assert report["method"] == "tv"
    assert report["wall_time_seconds"] > 0
    assert report["solver_reports"] and all(
        r["converged"] for r in report["solver_reports"]
    )
    # rebuild the command from the report's parameter vocabulary
    params = report["parameters"]
    argv = ["inpaint", "--input", report["input"], "--mask", report["mask"],
            "--output", str(workspace / "c.png")]
    for key, val in params.items():
        argv += [f"--{key.replace('_', '-')}", str(val)]
    assert run_cli(argv) == 0
    assert (workspace / "c.png").read_bytes() == (workspace / "a.png").read_bytes()


def test_exemplar_via_cli(workspace):
    rc = run_cli(
        [
            "inpaint",
            "--method", "exemplar",
            "--patch-size", "5",
            "--input", str(workspace / "img.png"),
            "--mask", str(workspace / "mask.png"),
            "--output", str(workspace / "ex.png"),
        ]
    )
    assert rc == 0
    out = load_image(workspace / "ex.png")
    expected = load_image(workspace / "img.png")
    np.testing.assert_array_equal(out.data, expected.data)  # stripes continue


def test_osmosis_via_cli(workspace):
    report = workspace / "osmo.json"
    rc = run_cli(
        [
            "osmosis",
            "--input", str(workspace / "noisy.png"),
            "--source", str(workspace / "img.png"),
            "--output", str(workspace / "fused.png"),
            "--dt", "10", "--steps", "5",
            "--json-report", str(report),
        ]
    )
    assert rc == 0
    fused = load_image(workspace / "fused.png")
    assert fused.channels == 3
    rep = json.loads(report.read_text())
    assert rep["parameters"]["region"] == "full"
    assert rep["parameters"]["dt"] == 10


def test_detect_report_contains_counts(workspace):
    report = workspace / "det.json"
    rc = run_cli(
        [
            "detect",
            "--input", str(workspace / "img.png"),
            "--seed", "2,3", "--seed", "20,20",
            "--tolerance", "0.1",
            "--dilate-radius", "1",
            "--output", str(workspace / "m2.png"),
            "--json-report", str(report),
        ]
    )
    assert rc == 0
    rep = json.loads(report.read_text())
    assert rep["count_true"] == 24 * 24  # both halves seeded, dilation no-op
    assert rep["parameters"]["seeds"] == [[2, 3], [20, 20]]
