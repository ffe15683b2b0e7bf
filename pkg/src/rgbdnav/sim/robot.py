"""Skid-steer robot treated as a unicycle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..geometry import Pose2D
from ..planner import VelocityCommand


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D = field(default_factory=Pose2D)
    v: float = 0.0
    omega: float = 0.0
    radius: float = 0.3

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("robot radius must be positive")


def step_robot(state: RobotState, cmd: VelocityCommand, dt: float) -> RobotState:
    """Explicit Euler step of the unicycle model."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    p = state.pose
    pose = Pose2D(
        p.x + cmd.v * math.cos(p.yaw) * dt,
        p.y + cmd.v * math.sin(p.yaw) * dt,
        p.yaw + cmd.omega * dt,
    )
    return replace(state, pose=pose, v=cmd.v, omega=cmd.omega)
