"""Command-line entry point.

Exit codes: 0 success (goal reached for ``run-scenario``), 1 invalid input
or configuration, 2 collision, 3 timeout.  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .camera import (
    CameraIntrinsics,
    DEFAULT_FAR,
    DEFAULT_NEAR,
    Frustum,
    depth_image_to_laserscan,
    depth_image_to_pointcloud,
    intrinsics_from_fov,
)
from .geometry import camera_mount
from .sim import COLLISION, GOAL, ConfigError, load_config, run_scenario
from .sim.scenario import CostmapStack
from .streamsync import (
    KEEP_ALL,
    KEEP_LATEST,
    ChannelSpec,
    delivered_rate,
    desync_ratio,
    make_stream,
    synchronize,
    transmit,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_COLLISION = 2
EXIT_TIMEOUT = 3

BUILTIN_PREFIX = "builtin:"


class CliError(Exception):
    pass


def builtin_scenario(name: str) -> Path:
    path = resources.files("rgbdnav") / "scenarios" / f"{name}.toml"
    if not path.is_file():
        raise CliError(f"no built-in scenario named {name!r}")
    return Path(str(path))


def _config_path(arg: str) -> Path:
    if arg.startswith(BUILTIN_PREFIX):
        return builtin_scenario(arg[len(BUILTIN_PREFIX):])
    return Path(arg)


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _out_dir(path: str) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {p}: {exc.strerror}") from None
    return p


def _intrinsics(args: argparse.Namespace, width: int, height: int) -> CameraIntrinsics:
    if args.fx is not None:
        fy = args.fy if args.fy is not None else args.fx
        cx = args.cx if args.cx is not None else (width - 1) / 2.0
        cy = args.cy if args.cy is not None else (height - 1) / 2.0
        return CameraIntrinsics(width, height, args.fx, fy, cx, cy)
    return intrinsics_from_fov(width, height, math.radians(args.hfov), math.radians(args.vfov))


def _read_depth(path: str) -> np.ndarray:
    try:
        return io.read_depth_pgm(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except io.PGMError as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_run_scenario(args: argparse.Namespace) -> int:
    cfg = load_config(_config_path(args.config), args.overrides)
    out = _out_dir(args.out)
    report = run_scenario(cfg)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    (out / "trajectory.csv").write_text(io.trajectory_csv(report.trajectory))
    for k, (tick, path) in enumerate(report.plans):
        (out / f"path_{k:02d}_tick{tick:04d}.csv").write_text(io.path_csv(path.waypoints))
    for tick, grid in sorted(report.snapshots.items()):
        io.write_grid(out / f"costmap_tick{tick:04d}.pgm", grid)
    print(f"{report.outcome} after {report.ticks} ticks, {report.replan_count} replan(s)")
    if report.outcome == GOAL:
        return EXIT_OK
    if report.outcome == COLLISION:
        return EXIT_COLLISION
    return EXIT_TIMEOUT


def cmd_depth_to_scan(args: argparse.Namespace) -> int:
    depth = _read_depth(args.depth)
    h, w = depth.shape
    k = _intrinsics(args, w, h)
    row = args.band_row if args.band_row is not None else h // 2
    try:
        scan = depth_image_to_laserscan(depth, k, row, args.band_height, args.range_min, args.range_max)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    Path(args.out).write_text(io.scan_csv(scan))
    return EXIT_OK


def cmd_depth_to_cloud(args: argparse.Namespace) -> int:
    depth = _read_depth(args.depth)
    h, w = depth.shape
    k = _intrinsics(args, w, h)
    f = Frustum(args.near, args.far, k.hfov, k.vfov)
    cloud = depth_image_to_pointcloud(depth, k, f)
    if args.frame == "base":
        cloud = cloud.transformed(camera_mount(), "base")
    Path(args.out).write_text(io.cloud_csv(cloud))
    return EXIT_OK


def sync_summary(args: argparse.Namespace) -> tuple[dict, list[tuple]]:
    channel = ChannelSpec(args.bandwidth, args.policy, args.queue_capacity)
    images = transmit(make_stream(args.image_rate, args.image_size, args.horizon, "image"), channel, args.horizon)
    meta = transmit(make_stream(args.meta_rate, args.meta_size, args.horizon, "metadata"), channel, args.horizon)
    pairs = synchronize(meta, images)
    events = [(d.arrival, "image", "delivered", d.stamp) for d in images]
    events += [(d.arrival, "metadata", "delivered", d.stamp) for d in meta]
    events += [(p.emitted, "pair", "published", p.stamp) for p in pairs]
    events.sort(key=lambda e: (e[0], e[1]))
    summary = {
        "horizon_s": args.horizon,
        "image_rate_hz": delivered_rate([d.arrival for d in images], args.horizon),
        "metadata_rate_hz": delivered_rate([d.arrival for d in meta], args.horizon),
        "pair_rate_hz": delivered_rate([p.emitted for p in pairs], args.horizon),
        "images_delivered": len(images),
        "metadata_delivered": len(meta),
        "pairs": len(pairs),
        "desync_ratio_before": desync_ratio(meta, images),
        "desync_ratio_after": desync_ratio(pairs, pairs) if pairs else None,
    }
    return summary, events


def cmd_sync_demo(args: argparse.Namespace) -> int:
    summary, events = sync_summary(args)
    Path(args.out).write_text(io.rows_csv(("time_s", "stream", "event", "stamp_s"), events))
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.summary:
        Path(args.summary).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_export_grid(args: argparse.Namespace) -> int:
    cfg = load_config(_config_path(args.config), args.overrides)
    stack = CostmapStack(cfg)
    grid = None
    for tick in range(args.updates):
        grid = stack.update(cfg.robot, tick)
    if grid is None:
        from .costmap import compose_layers, inflate

        grid = inflate(compose_layers([stack.static, stack.lidar, stack.camera]), cfg.inflation)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_grid(out, grid)
    return EXIT_OK


def _add_intrinsics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hfov", type=_positive, default=87.0, help="horizontal FOV in degrees")
    p.add_argument("--vfov", type=_positive, default=58.0, help="vertical FOV in degrees")
    p.add_argument("--fx", type=_positive, help="focal length in pixels (overrides the FOVs)")
    p.add_argument("--fy", type=_positive)
    p.add_argument("--cx", type=float)
    p.add_argument("--cy", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgbdnav", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-scenario", help="run a closed-loop scenario")
    p.add_argument("config", help=f"scenario TOML file or {BUILTIN_PREFIX}<name>")
    p.add_argument("overrides", nargs="*", metavar="KEY=VALUE")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_run_scenario)

    p = sub.add_parser("depth-to-scan", help="convert a 16-bit depth PGM to a laser scan CSV")
    p.add_argument("depth")
    p.add_argument("--out", required=True)
    _add_intrinsics(p)
    p.add_argument("--band-row", type=int, help="band center row (default: middle row)")
    p.add_argument("--band-height", type=int, default=1)
    p.add_argument("--range-min", type=float, default=DEFAULT_NEAR)
    p.add_argument("--range-max", type=float, default=DEFAULT_FAR)
    p.set_defaults(func=cmd_depth_to_scan)

    p = sub.add_parser("depth-to-cloud", help="deproject a 16-bit depth PGM to a point cloud CSV")
    p.add_argument("depth")
    p.add_argument("--out", required=True)
    _add_intrinsics(p)
    p.add_argument("--near", type=_positive, default=DEFAULT_NEAR)
    p.add_argument("--far", type=_positive, default=DEFAULT_FAR)
    p.add_argument("--frame", choices=("camera", "base"), default="camera")
    p.set_defaults(func=cmd_depth_to_cloud)

    p = sub.add_parser("sync-demo", help="simulate a bandwidth-limited camera link and the synchronizer")
    p.add_argument("--image-rate", type=_positive, default=60.0, help="Hz")
    p.add_argument("--image-size", type=_positive, default=1.1, help="megabits")
    p.add_argument("--meta-rate", type=_positive, default=60.0, help="Hz")
    p.add_argument("--meta-size", type=_positive, default=0.001, help="megabits")
    p.add_argument("--bandwidth", type=_positive, default=1.0, help="megabits per second")
    p.add_argument("--horizon", type=_positive, default=60.0, help="seconds")
    p.add_argument("--policy", choices=(KEEP_LATEST, KEEP_ALL), default=KEEP_LATEST)
    p.add_argument("--queue-capacity", type=_positive, default=1)
    p.add_argument("--out", required=True, help="event CSV")
    p.add_argument("--summary", help="also write the summary JSON here")
    p.set_defaults(func=cmd_sync_demo)

    p = sub.add_parser("export-grid", help="write the master costmap seen from the start pose")
    p.add_argument("config")
    p.add_argument("overrides", nargs="*", metavar="KEY=VALUE")
    p.add_argument("--out", required=True, help="PGM path; a .yaml sidecar is written next to it")
    p.add_argument("--updates", type=int, default=1, help="sensor updates before export")
    p.set_defaults(func=cmd_export_grid)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, ConfigError) as exc:
        print(f"rgbdnav {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"rgbdnav {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
