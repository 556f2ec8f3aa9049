"""CLI contract: flags, exit codes, artifact formats, replayability."""

import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from horseshoe.cli import EX_NO, EX_OK, EX_UNKNOWN, EX_USAGE, main
from horseshoe.henon import parse_complex


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_ppm(data: bytes):
    assert data[:2] == b"P6"
    header_end = data.index(b"255\n") + 4
    head = data[:header_end].decode("latin1")
    width, height = (int(t) for t in re.findall(r"^(\d+) (\d+)$", head, re.M)[0])
    rgb = np.frombuffer(data[header_end:], dtype=np.uint8)
    return head, rgb.reshape(height, width, 3)


def csv_rows(text: str):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    return header, [l.split(",") for l in lines[1:]]


def test_certify_inequality_yes():
    assert main(["certify", "--a", "1", "--c", "-10", "--gamma", "1"]) == EX_OK


def test_certify_payload_shape_and_key_order(capsys):
    code, out, _ = run_cli(capsys, ["certify", "--a", "1", "--c", "-10", "--gamma", "1"])
    assert code == EX_OK
    doc = json.loads(out)
    assert list(doc.keys()) == [
        "method", "map", "R", "alpha", "gamma", "margin", "verdict",
        "boxes", "depth", "wall_ms", "config",
    ]
    assert doc["verdict"] == "yes"
    assert doc["margin"] > 0
    assert doc["wall_ms"] == 0.0
    assert doc["config"]["subcommand"] == "certify"
    assert doc["config"]["map"] == doc["map"]


def test_certify_below_threshold_exits_one(capsys):
    code, out, _ = run_cli(capsys, ["certify", "--a", "1", "--c", "-9"])
    assert code == EX_NO
    assert json.loads(out)["verdict"] == "no"


def test_certify_cone_sweep_method(capsys):
    # R=4.4 keeps the outer fixed point strictly inside the bidisc; at the
    # bare escape radius it sits on the boundary and the corner cell never
    # certifies at finite depth
    code, out, _ = run_cli(
        capsys,
        ["certify", "--a", "1", "--c", "-10", "--method", "cone-sweep",
         "--depth", "14", "--R", "4.4"],
    )
    assert code == EX_OK
    doc = json.loads(out)
    assert doc["method"] == "cone_sweep"
    assert doc["boxes"] > 0


def test_certify_optimize_method(capsys):
    code, out, _ = run_cli(
        capsys,
        ["certify", "--a", "1", "--c", "-10", "--method", "optimize", "--budget", "3"],
    )
    assert code == EX_OK
    assert json.loads(out)["verdict"] == "yes"


def test_cycles_matches_known_counts(capsys):
    code, out, _ = run_cli(capsys, ["cycles", "--d", "2", "--max-period", "12"])
    assert code == EX_OK
    header, rows = csv_rows(out)
    assert header == ["period", "points", "cycles"]
    assert [int(r[2]) for r in rows] == [2, 1, 2, 3, 6, 9, 18, 30, 56, 99, 186, 335]
    assert [int(r[1]) for r in rows] == [2, 2, 6, 12, 30, 54, 126, 240, 504, 990, 2046, 4020]


def test_cycles_embeds_config(capsys):
    _, out, _ = run_cli(capsys, ["cycles", "--d", "3", "--max-period", "4"])
    first = out.splitlines()[0]
    assert first.startswith("# config: ")
    cfg = json.loads(first[len("# config: "):])
    assert cfg["subcommand"] == "cycles"
    assert cfg["d"] == 3


def test_enumerate_fixed_points_csv(capsys):
    code, out, _ = run_cli(capsys, ["enumerate", "--a", "1", "--c", "-10", "--n", "1"])
    assert code == EX_OK
    header, rows = csv_rows(out)
    assert header[:4] == ["re(x)", "im(x)", "re(y)", "im(y)"]
    assert len(rows) == 2
    xs = sorted(float(r[0]) for r in rows)
    assert math.isclose(xs[0], 1 - math.sqrt(11), abs_tol=1e-9)
    assert math.isclose(xs[1], 1 + math.sqrt(11), abs_tol=1e-9)
    for r in rows:
        assert float(r[5]) <= 1e-10
        # multiplier columns must be plain floats, not library reprs
        float(r[6]), float(r[7])


def test_itinerary_fixed_point_word(capsys):
    x = repr(1 + math.sqrt(11))
    code, out, _ = run_cli(
        capsys,
        ["itinerary", "--a", "1", "--c", "-10", "--x", x, "--y", x, "--back", "3", "--fwd", "4"],
    )
    assert code == EX_OK
    assert out.splitlines()[-1] == "111^11111"


def test_itinerary_outside_k_exits_one(capsys):
    code, _, err = run_cli(
        capsys, ["itinerary", "--a", "1", "--c", "-10", "--x", "50", "--y", "0"]
    )
    assert code == EX_NO
    assert "escapes" in err


def test_slice_writes_ppm_and_csv(tmp_path, capsys):
    ppm = tmp_path / "s.ppm"
    csv_path = tmp_path / "s.csv"
    argv = [
        "slice", "--a", "1", "--c", "-10", "--resolution", "48",
        "--out", str(ppm), "--csv", str(csv_path),
    ]
    assert main(argv) == EX_OK
    capsys.readouterr()
    head, rgb = parse_ppm(ppm.read_bytes())
    assert "# config: " in head
    assert rgb.shape == (48, 48, 3)
    header, rows = csv_rows(csv_path.read_text())
    assert header == ["re(x)", "im(x)", "re(y)", "im(y)", "fwd", "bwd"]
    assert len(rows) == 48 * 48


def test_slice_artifact_is_reproducible(tmp_path, capsys):
    ppm = tmp_path / "s.ppm"
    argv = ["slice", "--a", "1", "--c", "-10", "--resolution", "32", "--out", str(ppm)]
    assert main(argv) == EX_OK
    first = ppm.read_bytes()
    assert main(argv) == EX_OK
    capsys.readouterr()
    assert ppm.read_bytes() == first


def test_certify_artifact_is_reproducible(tmp_path, capsys):
    out = tmp_path / "c.json"
    argv = ["certify", "--a", "1", "--c", "-10", "--out", str(out)]
    assert main(argv) == EX_OK
    first = out.read_bytes()
    assert main(argv) == EX_OK
    capsys.readouterr()
    assert out.read_bytes() == first


def test_decay_reports_geometric_contraction(capsys):
    code, out, _ = run_cli(capsys, ["decay", "--a", "1", "--c", "-10", "--depth", "4"])
    assert code == EX_OK
    doc = json.loads(out)
    assert doc["counts"] == [2, 4, 8, 16]
    assert doc["counts"] == doc["expected_counts"]
    assert max(doc["ratios"]) < 1.0
    assert doc["geometric"] is True
    assert doc["config"]["depth"] == 4


def test_homoclinic_pipeline_json(tmp_path, capsys):
    out = tmp_path / "h.json"
    code = main(["homoclinic", "--a", "0.3", "--c", "-1.4", "--d", "2", "--out", str(out)])
    capsys.readouterr()
    assert code == EX_OK
    doc = json.loads(out.read_text())
    assert list(doc.keys()) == ["saddle", "q", "angle", "N", "chart", "certificate", "config"]
    assert doc["angle"] > 1e-2
    assert doc["N"] >= 1
    assert doc["certificate"]["verdict"] == "yes"
    qx = parse_complex(doc["q"][0])
    assert abs(qx.imag) < 1e-9
    assert doc["chart"]["r_u"] > 0 and doc["chart"]["r_s"] > 0
    assert doc["config"]["d"] == 2


def test_homoclinic_overlay_ppm(tmp_path, capsys):
    out = tmp_path / "h.json"
    ppm = tmp_path / "h.ppm"
    code = main([
        "homoclinic", "--a", "0.3", "--c", "-1.4", "--out", str(out),
        "--ppm", str(ppm), "--resolution", "128",
    ])
    capsys.readouterr()
    assert code == EX_OK
    head, rgb = parse_ppm(ppm.read_bytes())
    assert rgb.shape == (128, 128, 3)
    for color in ((255, 64, 64), (64, 224, 64), (255, 224, 32)):
        assert np.all(rgb == color, axis=-1).sum() > 0


def test_unknown_subcommand_exits_usage():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == EX_USAGE


def test_unknown_flag_exits_usage():
    with pytest.raises(SystemExit) as exc:
        main(["cycles", "--d", "2", "--max-period", "4", "--frobnicate"])
    assert exc.value.code == EX_USAGE


def test_no_subcommand_exits_usage(capsys):
    code, _, _ = run_cli(capsys, [])
    assert code == EX_USAGE


def test_bad_complex_value_exits_usage(capsys):
    code, _, err = run_cli(capsys, ["certify", "--a", "1", "--c", "zorp"])
    assert code == EX_USAGE
    assert "error" in err


def test_missing_map_exits_usage(capsys):
    code, _, _ = run_cli(capsys, ["certify", "--a", "1"])
    assert code == EX_USAGE


def test_slice_requires_out():
    with pytest.raises(SystemExit) as exc:
        main(["slice", "--a", "1", "--c", "-10"])
    assert exc.value.code == EX_USAGE


def test_timing_goes_to_stderr_not_artifact(capsys):
    code, out, err = run_cli(capsys, ["cycles", "--d", "2", "--max-period", "3"])
    assert code == EX_OK
    assert "wall_ms" in err
    assert "wall_ms" not in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "horseshoe.cli", "cycles", "--d", "2", "--max-period", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == EX_OK
    assert proc.stdout.splitlines()[-1] == "2,2,1"
