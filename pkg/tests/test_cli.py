import json
import math

import numpy as np
import pytest

from rgbdnav import io
from rgbdnav.camera import depth_image_to_laserscan, intrinsics_from_fov
from rgbdnav.cli import main


def write_depth(path, depth):
    io.write_depth_pgm(path, depth)
    return str(path)


def test_run_scenario_writes_outputs(tmp_path, capsys, bridge_config_path):
    code = main(["run-scenario", str(bridge_config_path), "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["goal_reached"] and report["replan_count"] >= 1
    assert (tmp_path / "trajectory.csv").read_text().startswith("t_s,x_m,y_m,yaw_rad\n")
    assert (tmp_path / "costmap_tick0030.pgm").exists()
    assert (tmp_path / "costmap_tick0030.yaml").exists()
    assert sorted(p.name for p in tmp_path.glob("path_*.csv"))[0] == "path_00_tick0000.csv"
    captured = capsys.readouterr()
    assert captured.err == ""


def test_run_scenario_camera_off_collides(tmp_path):
    assert main(["run-scenario", "builtin:bridge", "camera.enabled=false", "--out", str(tmp_path)]) == 2


def test_run_scenario_timeout_exit_code(tmp_path):
    assert main(["run-scenario", "builtin:bridge", "run.timeout=0.3", "--out", str(tmp_path)]) == 3


def test_missing_config(tmp_path, capsys):
    missing = tmp_path / "missing.toml"
    assert main(["run-scenario", str(missing), "--out", str(tmp_path / "o")]) == 1
    captured = capsys.readouterr()
    assert str(missing) in captured.err
    assert captured.out == ""


def test_bad_override(tmp_path, capsys):
    assert main(["run-scenario", "builtin:bridge", "camera.zoom=2", "--out", str(tmp_path)]) == 1
    assert "camera.zoom" in capsys.readouterr().err


def test_depth_to_scan_single_column(tmp_path):
    depth = np.zeros((9, 16))
    depth[:, 5] = 1.5
    src = write_depth(tmp_path / "d.pgm", depth)
    out = tmp_path / "scan.csv"
    assert main(["depth-to-scan", src, "--out", str(out)]) == 0
    angles, ranges = io.read_scan_csv(out)
    assert len(ranges) == 16
    assert np.isfinite(ranges).sum() == 1
    assert np.isfinite(ranges[5])


def test_depth_to_scan_all_sentinel(tmp_path):
    src = write_depth(tmp_path / "d.pgm", np.zeros((9, 16)))
    out = tmp_path / "scan.csv"
    assert main(["depth-to-scan", src, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "angle_rad,range_m"
    assert len(lines) == 17 and all(line.endswith(",inf") for line in lines[1:])


def test_depth_to_scan_matches_library(tmp_path):
    rng = np.random.default_rng(4)
    depth = rng.uniform(0.2, 4.0, (90, 160))
    depth[rng.random(depth.shape) < 0.2] = 0
    src = write_depth(tmp_path / "d.pgm", depth)
    out = tmp_path / "scan.csv"
    assert main(["depth-to-scan", src, "--out", str(out), "--band-row", "40", "--band-height", "7"]) == 0
    k = intrinsics_from_fov(160, 90, math.radians(87), math.radians(58))
    expected = io.scan_csv(depth_image_to_laserscan(io.read_depth_pgm(src), k, 40, 7, 0.3, 3.0))
    assert out.read_text() == expected
    again = tmp_path / "again.csv"
    main(["depth-to-scan", src, "--out", str(again), "--band-row", "40", "--band-height", "7"])
    assert again.read_bytes() == out.read_bytes()


def test_depth_to_scan_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n2 2\n65535\n\x00")
    assert main(["depth-to-scan", str(bad), "--out", str(tmp_path / "s.csv")]) == 1
    assert "byte offset" in capsys.readouterr().err


def test_depth_to_scan_band_out_of_bounds(tmp_path):
    src = write_depth(tmp_path / "d.pgm", np.ones((9, 16)))
    assert main(["depth-to-scan", src, "--out", str(tmp_path / "s.csv"), "--band-row", "0", "--band-height", "5"]) == 1


def test_depth_to_cloud(tmp_path):
    depth = np.zeros((9, 17))
    depth[4, 8] = 1.0
    src = write_depth(tmp_path / "d.pgm", depth)
    out = tmp_path / "cloud.csv"
    assert main(["depth-to-cloud", src, "--out", str(out), "--frame", "base"]) == 0
    assert out.read_text().splitlines() == ["x_m,y_m,z_m", "1.345,0.0,0.28"]


def test_sync_demo_reference_link(tmp_path, capsys):
    out = tmp_path / "events.csv"
    assert main(["sync-demo", "--out", str(out), "--summary", str(tmp_path / "s.json")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert 0.90 < summary["image_rate_hz"] < 0.92
    assert summary["desync_ratio_after"] == 1.0
    assert summary["pairs"] == summary["images_delivered"]
    assert json.loads((tmp_path / "s.json").read_text()) == summary
    assert out.read_text().startswith("time_s,stream,event,stamp_s\n")


def test_sync_demo_fast_link(tmp_path, capsys):
    assert main(["sync-demo", "--bandwidth", "1000", "--out", str(tmp_path / "e.csv")]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["image_rate_hz"] == pytest.approx(60.0)


def test_sync_demo_rejects_non_positive(tmp_path):
    assert main(["sync-demo", "--bandwidth", "0", "--out", str(tmp_path / "e.csv")]) == 1
    assert main(["sync-demo", "--horizon", "-5", "--out", str(tmp_path / "e.csv")]) == 1


def test_export_grid(tmp_path):
    out = tmp_path / "grid.pgm"
    assert main(["export-grid", "builtin:bridge", "--out", str(out)]) == 0
    grid = io.read_grid(out)
    assert grid.spec.width == 200
    assert (grid.cost == 100).any()


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run-scenario", "builtin:bridge", "run.timeout=3.0", "--out", str(a)])
    main(["run-scenario", "builtin:bridge", "run.timeout=3.0", "--out", str(b)])
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()
