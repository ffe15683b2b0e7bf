"""Scenario configuration files (TOML).

Schema, with defaults (angles in degrees, distances in meters)::

    [world]
    bounds = [xmin, ymin, xmax, ymax]
    [[world.boxes]]            # repeatable
    name = "..."; min = [x, y, z]; max = [x, y, z]; static = false

    [robot]                    start = [x, y, yaw], radius, height
    [sensors.lidar]            enabled, translation, rpy, angle_min, angle_max,
                               angle_increment, range_min, range_max
    [sensors.camera]           enabled, translation, rpy, width, height,
                               hfov, vfov, near, far, noise_sigma0
    [costmap]                  width, height, resolution, origin = [x, y, yaw]
    [costmap.inflation]        inscribed_radius, inflation_radius, decay
    [costmap.camera]           max_obstacle_height, min_obstacle_height,
    [costmap.lidar]            obstacle_range, raytrace_range, marking, clearing
    [planner]                  connectivity, lethal_threshold, unknown_cost,
                               use_astar, v_max, omega_max, lookahead, heading_gain
    [run]                      dt, timeout, goal = [x, y], goal_tolerance, seed,
                               snapshot_ticks = [...]

Overrides are ``dotted.key=value`` strings.  A key may omit leading
sections as long as the remaining suffix names exactly one setting, so
``camera.enabled=false`` addresses ``sensors.camera.enabled``.
"""

from __future__ import annotations

import copy
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..camera import Frustum, intrinsics_from_fov
from ..costmap import GridSpec, InflationParams, ObstacleLayerParams
from ..geometry import Pose2D, RigidTransform, camera_mount
from .robot import RobotState
from .sensors import SensorRig
from .world import Box, WorldModel

DEFAULTS: dict[str, Any] = {
    "world": {"bounds": [0.0, 0.0, 10.0, 10.0], "boxes": []},
    "robot": {"start": [1.0, 5.0, 0.0], "radius": 0.3, "height": 1.0},
    "sensors": {
        "lidar": {
            "enabled": True,
            "translation": [0.0, 0.0, 0.15],
            "rpy": [0.0, 0.0, 0.0],
            "angle_min": -135.0,
            "angle_max": 135.0,
            "angle_increment": 1.0,
            "range_min": 0.05,
            "range_max": 5.0,
        },
        "camera": {
            "enabled": True,
            "translation": [0.345, 0.0, 0.28],
            "rpy": [0.0, 0.0, 0.0],
            "width": 160,
            "height": 90,
            "hfov": 87.0,
            "vfov": 58.0,
            "near": 0.3,
            "far": 3.0,
            "noise_sigma0": 0.004,
        },
    },
    "costmap": {
        "width": 200,
        "height": 200,
        "resolution": 0.05,
        "origin": [0.0, 0.0, 0.0],
        "inflation": {"inscribed_radius": 0.3, "inflation_radius": 0.8, "decay": 5.0},
        "camera": {
            "max_obstacle_height": 1.0,
            "min_obstacle_height": 0.35,
            "obstacle_range": 2.0,
            "raytrace_range": 2.0,
            "marking": True,
            "clearing": True,
        },
        "lidar": {
            "max_obstacle_height": 2.0,
            "min_obstacle_height": 0.0,
            "obstacle_range": 4.0,
            "raytrace_range": 5.0,
            "marking": True,
            "clearing": True,
        },
    },
    "planner": {
        "connectivity": 8,
        "lethal_threshold": 99,
        "unknown_cost": 50,
        "use_astar": False,
        "v_max": 0.5,
        "omega_max": 1.5,
        "lookahead": 0.4,
        "heading_gain": 2.0,
    },
    "run": {
        "dt": 0.1,
        "timeout": 60.0,
        "goal": [7.0, 5.0],
        "goal_tolerance": 0.1,
        "seed": 0,
        "snapshot_ticks": [],
    },
}

BOX_KEYS = {"name": "", "min": None, "max": None, "static": False}


class ConfigError(ValueError):
    """Invalid scenario configuration; ``line`` points into the source when known."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self) -> str:
        where = [str(x) for x in (self.path, self.line) if x is not None]
        return f"{':'.join(where)}: {self.message}" if where else self.message


def schema_keys(tree: dict[str, Any] = DEFAULTS, prefix: str = "") -> list[str]:
    keys = []
    for k, v in tree.items():
        if isinstance(v, dict):
            keys.extend(schema_keys(v, f"{prefix}{k}."))
        else:
            keys.append(prefix + k)
    return keys


def _locate(text: str, dotted: str) -> int | None:
    """Best-effort line number of ``dotted`` key in TOML source."""
    *sections, key = dotted.split(".")
    header = ".".join(sections)
    current = ""
    key_re = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?", line)
        if m:
            current = m.group(1)
            if current == dotted:
                return n
            continue
        if current == header and key_re.match(line):
            return n
    return None


def _box_line(text: str, index: int) -> int | None:
    seen = -1
    for n, line in enumerate(text.splitlines(), start=1):
        if re.match(r"^\s*\[\[\s*world\.boxes\s*\]\]", line):
            seen += 1
            if seen == index:
                return n
    return None


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def resolve_key(key: str) -> str:
    keys = schema_keys()
    if key in keys:
        return key
    matches = [k for k in keys if k.endswith("." + key)]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise ConfigError(f"override {key!r} does not name a setting")
    raise ConfigError(f"override {key!r} is ambiguous: {', '.join(matches)}")


def apply_overrides(raw: dict[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, value = item.split("=", 1)
        full = resolve_key(key.strip())
        node = out
        *sections, leaf = full.split(".")
        for s in sections:
            node = node.setdefault(s, {})
        node[leaf] = _parse_value(value.strip())
    return out


def _merge(defaults: dict[str, Any], given: dict[str, Any], text: str, prefix: str = "") -> dict[str, Any]:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        path = prefix + k
        if k not in defaults:
            raise ConfigError(f"unknown setting {path!r}", _locate(text, path))
        if isinstance(defaults[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{path!r} must be a table", _locate(text, path))
            out[k] = _merge(defaults[k], v, text, path + ".")
        else:
            out[k] = _coerce(defaults[k], v, path, text)
    return out


def _coerce(default: Any, value: Any, path: str, text: str) -> Any:
    bad = ConfigError(f"{path!r} expects {type(default).__name__}, got {value!r}", _locate(text, path))
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise bad
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise bad
        return value
    return value


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    world: WorldModel
    robot: RobotState
    robot_height: float
    rig: SensorRig
    lidar_enabled: bool
    camera_enabled: bool
    grid: GridSpec
    inflation: InflationParams
    camera_layer: ObstacleLayerParams
    lidar_layer: ObstacleLayerParams
    connectivity: int
    lethal_threshold: int
    unknown_cost: int
    use_astar: bool
    v_max: float
    omega_max: float
    lookahead: float
    heading_gain: float
    dt: float
    timeout: float
    goal: Pose2D
    goal_tolerance: float
    seed: int
    snapshot_ticks: tuple[int, ...]
    raw: dict[str, Any]


def _vec(values: Any, n: int, path: str, text: str) -> list[float]:
    if not (isinstance(values, list) and len(values) == n and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in values
    )):
        raise ConfigError(f"{path!r} must be a list of {n} numbers", _locate(text, path))
    return [float(x) for x in values]


def _boxes(items: Any, text: str) -> list[Box]:
    if not isinstance(items, list):
        raise ConfigError("world.boxes must be an array of tables", _locate(text, "world.boxes"))
    boxes = []
    for i, item in enumerate(items):
        line = _box_line(text, i)
        if not isinstance(item, dict):
            raise ConfigError("each world.boxes entry must be a table", line)
        unknown = set(item) - set(BOX_KEYS)
        if unknown:
            raise ConfigError(f"unknown box setting(s) {sorted(unknown)}", line)
        for k in ("min", "max"):
            if k not in item:
                raise ConfigError(f"box #{i} is missing {k!r}", line)
        try:
            lo = _vec(item["min"], 3, "world.boxes.min", text)
            hi = _vec(item["max"], 3, "world.boxes.max", text)
            boxes.append(Box(lo, hi, str(item.get("name", f"box{i}")), bool(item.get("static", False))))
        except ValueError as exc:
            raise ConfigError(getattr(exc, "message", str(exc)), line) from None
    return boxes


def build_config(raw: dict[str, Any], text: str = "") -> ScenarioConfig:
    """Validate a parsed document (after overrides) and build typed settings."""
    cfg = _merge(DEFAULTS, raw, text)
    try:
        w = cfg["world"]
        world = WorldModel(tuple(_boxes(w["boxes"], text)), tuple(_vec(w["bounds"], 4, "world.bounds", text)))

        r = cfg["robot"]
        sx, sy, syaw = _vec(r["start"], 3, "robot.start", text)
        robot = RobotState(Pose2D(sx, sy, math.radians(syaw)), radius=r["radius"])

        li = cfg["sensors"]["lidar"]
        roll, pitch, yaw = (math.radians(a) for a in _vec(li["rpy"], 3, "sensors.lidar.rpy", text))
        lidar_mount = RigidTransform.from_xyz_rpy(
            _vec(li["translation"], 3, "sensors.lidar.translation", text), roll, pitch, yaw
        )
        ca = cfg["sensors"]["camera"]
        roll, pitch, yaw = (math.radians(a) for a in _vec(ca["rpy"], 3, "sensors.camera.rpy", text))
        cam = camera_mount(_vec(ca["translation"], 3, "sensors.camera.translation", text), roll, pitch, yaw)
        hfov, vfov = math.radians(ca["hfov"]), math.radians(ca["vfov"])
        rig = SensorRig(
            lidar_mount=lidar_mount,
            lidar_angle_min=math.radians(li["angle_min"]),
            lidar_angle_max=math.radians(li["angle_max"]),
            lidar_angle_increment=math.radians(li["angle_increment"]),
            lidar_range_min=li["range_min"],
            lidar_range_max=li["range_max"],
            camera_mount=cam,
            intrinsics=intrinsics_from_fov(ca["width"], ca["height"], hfov, vfov),
            frustum=Frustum(ca["near"], ca["far"], hfov, vfov),
            noise_sigma0=ca["noise_sigma0"],
        )

        c = cfg["costmap"]
        ox, oy, oyaw = _vec(c["origin"], 3, "costmap.origin", text)
        grid = GridSpec(c["width"], c["height"], c["resolution"], Pose2D(ox, oy, math.radians(oyaw)))

        p = cfg["planner"]
        if p["connectivity"] not in (4, 8):
            raise ConfigError("planner.connectivity must be 4 or 8", _locate(text, "planner.connectivity"))
        run = cfg["run"]
        goal = run["goal"]
        if isinstance(goal, list) and len(goal) == 3:
            gx, gy, gyaw = _vec(goal, 3, "run.goal", text)
        else:
            gx, gy = _vec(goal, 2, "run.goal", text)
            gyaw = 0.0
        for key in ("dt", "timeout", "goal_tolerance"):
            if not run[key] > 0:
                raise ConfigError(f"run.{key} must be positive", _locate(text, f"run.{key}"))
        ticks = run["snapshot_ticks"]
        if not all(isinstance(t, int) and t >= 0 for t in ticks):
            raise ConfigError("run.snapshot_ticks must be non-negative integers", _locate(text, "run.snapshot_ticks"))

        return ScenarioConfig(
            world=world,
            robot=robot,
            robot_height=r["height"],
            rig=rig,
            lidar_enabled=li["enabled"],
            camera_enabled=ca["enabled"],
            grid=grid,
            inflation=InflationParams(**c["inflation"]),
            camera_layer=ObstacleLayerParams(**c["camera"]),
            lidar_layer=ObstacleLayerParams(**c["lidar"]),
            connectivity=p["connectivity"],
            lethal_threshold=p["lethal_threshold"],
            unknown_cost=p["unknown_cost"],
            use_astar=p["use_astar"],
            v_max=p["v_max"],
            omega_max=p["omega_max"],
            lookahead=p["lookahead"],
            heading_gain=p["heading_gain"],
            dt=run["dt"],
            timeout=run["timeout"],
            goal=Pose2D(gx, gy, math.radians(gyaw)),
            goal_tolerance=run["goal_tolerance"],
            seed=run["seed"],
            snapshot_ticks=tuple(ticks),
            raw=cfg,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str, overrides: Iterable[str] = (), path: str | None = None) -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed TOML: {exc}", int(m.group(1)) if m else None, path) from None
    try:
        return build_config(apply_overrides(raw, overrides), text)
    except ConfigError as exc:
        exc.path = path
        raise


def load_config(path: str | Path, overrides: Iterable[str] = ()) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc.strerror}") from None
    return parse_config(text, overrides, str(p))
