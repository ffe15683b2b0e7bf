"""Closed-loop scenario: sense, update costmap layers, plan, follow, step."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..camera import depth_image_to_pointcloud
from ..costmap import (
    UNKNOWN,
    OccupancyGrid,
    clear_by_raytrace,
    compose_layers,
    inflate,
    mark_from_laserscan,
    mark_from_pointcloud,
    rasterize_footprint,
)
from ..planner import Path, PlanningError, VelocityCommand, follow, nearest_index, needs_replan, plan_global
from .config import ScenarioConfig
from .robot import RobotState, step_robot
from .sensors import simulate_depth, simulate_lidar

GOAL = "goal"
COLLISION = "collision"
TIMEOUT = "timeout"


@dataclass
class ScenarioReport:
    outcome: str
    ticks: int
    sim_time: float
    trajectory: NDArray[np.float64]  # rows of t, x, y, yaw
    replan_count: int
    collision: bool
    min_clearance: dict[str, float]
    plans: list[tuple[int, Path]] = field(default_factory=list)
    snapshots: dict[int, OccupancyGrid] = field(default_factory=dict)
    final_distance_to_goal: float = math.inf

    @property
    def goal_reached(self) -> bool:
        return self.outcome == GOAL

    def to_dict(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome,
            "goal_reached": self.goal_reached,
            "collision": self.collision,
            "ticks": self.ticks,
            "sim_time": self.sim_time,
            "replan_count": self.replan_count,
            "final_distance_to_goal": self.final_distance_to_goal,
            "min_clearance": self.min_clearance,
            "plans": [
                {"tick": tick, "waypoints": len(p.cells), "total_cost": p.total_cost}
                for tick, p in self.plans
            ],
            "snapshot_ticks": sorted(self.snapshots),
        }


class CostmapStack:
    """Static, LiDAR and camera layers plus the inflated master grid."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.static = OccupancyGrid(cfg.grid)
        for box in cfg.world.boxes:
            if box.static:
                rasterize_footprint(self.static, *box.footprint)
        self.lidar = OccupancyGrid(cfg.grid, fill=UNKNOWN)
        self.camera = OccupancyGrid(cfg.grid, fill=UNKNOWN)

    def update(self, state: RobotState, tick: int) -> OccupancyGrid:
        cfg = self.cfg
        pose = state.pose
        if cfg.lidar_enabled:
            scan = simulate_lidar(cfg.world, pose, cfg.rig)
            mark_from_laserscan(self.lidar, scan, cfg.rig.lidar_pose(pose), cfg.lidar_layer)
        if cfg.camera_enabled:
            depth = simulate_depth(cfg.world, pose, cfg.rig, rng_seed=cfg.seed * 1_000_003 + tick)
            cloud = depth_image_to_pointcloud(depth, cfg.rig.intrinsics, cfg.rig.frustum)
            world_cloud = cloud.transformed(cfg.rig.world_from_camera(pose), "world")
            sensor_xy = cfg.rig.world_from_camera(pose).translation[:2]
            # Rays are projected onto the ground plane before clearing.
            clear_by_raytrace(self.camera, sensor_xy, world_cloud.points[:, :2], cfg.camera_layer)
            mark_from_pointcloud(self.camera, world_cloud, sensor_xy, cfg.camera_layer)
        return inflate(compose_layers([self.static, self.lidar, self.camera]), cfg.inflation)


def _colliding(cfg: ScenarioConfig, state: RobotState) -> bool:
    p = state.pose
    return any(
        b.z_overlaps(0.0, cfg.robot_height) and b.distance_to_footprint(p.x, p.y) < state.radius
        for b in cfg.world.boxes
    )


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    state = cfg.robot
    stack = CostmapStack(cfg)
    max_ticks = int(math.ceil(cfg.timeout / cfg.dt - 1e-9))
    goal = cfg.goal

    traj = [(0.0, state.pose.x, state.pose.y, state.pose.yaw)]
    clearance = {b.name: b.distance_to_footprint(state.pose.x, state.pose.y) for b in cfg.world.boxes}
    plans: list[tuple[int, Path]] = []
    snapshots: dict[int, OccupancyGrid] = {}
    path: Path | None = None
    progress = 0
    replans = 0
    outcome = TIMEOUT
    tick = 0

    def dist_to_goal() -> float:
        return math.hypot(state.pose.x - goal.x, state.pose.y - goal.y)

    if _colliding(cfg, state):
        outcome = COLLISION
    elif dist_to_goal() <= cfg.goal_tolerance:
        outcome = GOAL
    else:
        for tick in range(max_ticks):
            master = stack.update(state, tick)
            if tick in cfg.snapshot_ticks:
                snapshots[tick] = master

            if path is None or needs_replan(path, master, cfg.lethal_threshold, progress):
                try:
                    new = plan_global(
                        master, state.pose, goal, cfg.lethal_threshold,
                        cfg.connectivity, cfg.unknown_cost, cfg.use_astar,
                    )
                except PlanningError:
                    new = None
                if new is not None:
                    if path is not None:
                        replans += 1
                    path, progress = new, 0
                    plans.append((tick, path))
                else:
                    path = None

            if path is None:
                cmd = VelocityCommand(0.0, 0.0)
            else:
                progress = nearest_index(path, state.pose.x, state.pose.y, progress)
                cmd = follow(path, state.pose, cfg.lookahead, cfg.v_max, cfg.omega_max, cfg.heading_gain, progress)

            state = step_robot(state, cmd, cfg.dt)
            t = (tick + 1) * cfg.dt
            traj.append((t, state.pose.x, state.pose.y, state.pose.yaw))
            for b in cfg.world.boxes:
                clearance[b.name] = min(clearance[b.name], b.distance_to_footprint(state.pose.x, state.pose.y))

            if _colliding(cfg, state):
                outcome = COLLISION
                break
            if dist_to_goal() <= cfg.goal_tolerance:
                outcome = GOAL
                break
        tick += 1

    return ScenarioReport(
        outcome=outcome,
        ticks=len(traj) - 1,
        sim_time=traj[-1][0],
        trajectory=np.array(traj),
        replan_count=replans,
        collision=outcome == COLLISION,
        min_clearance=clearance,
        plans=plans,
        snapshots=snapshots,
        final_distance_to_goal=dist_to_goal(),
    )
