"""Ray-cast models of the planar LiDAR and the depth camera."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..camera import CameraIntrinsics, Frustum, LaserScan, default_intrinsics
from ..geometry import Pose2D, RigidTransform, camera_mount, compose, pose2d_to_transform
from .world import WorldModel, raycast_many

LIDAR_HEIGHT = 0.15


@dataclass(frozen=True, eq=False)
class SensorRig:
    """Sensor mounts and models.

    ``lidar_mount`` maps LiDAR-frame points into the base frame;
    ``camera_mount`` maps camera optical-frame points into the base frame.
    Depth noise has standard deviation ``noise_sigma0 * z**2``.
    """

    lidar_mount: RigidTransform = field(
        default_factory=lambda: RigidTransform.from_translation(0.0, 0.0, LIDAR_HEIGHT)
    )
    lidar_angle_min: float = -math.radians(135.0)
    lidar_angle_max: float = math.radians(135.0)
    lidar_angle_increment: float = math.radians(1.0)
    lidar_range_min: float = 0.05
    lidar_range_max: float = 5.0
    camera_mount: RigidTransform = field(default_factory=camera_mount)
    intrinsics: CameraIntrinsics = field(default_factory=default_intrinsics)
    frustum: Frustum = field(default_factory=Frustum)
    noise_sigma0: float = 0.004

    def __post_init__(self) -> None:
        if not self.lidar_angle_increment > 0:
            raise ValueError("lidar angle increment must be positive")
        if self.noise_sigma0 < 0:
            raise ValueError("noise_sigma0 must be non-negative")

    def lidar_pose(self, robot_pose: Pose2D) -> Pose2D:
        """Planar pose of the LiDAR in the world."""
        t = compose(pose2d_to_transform(robot_pose), self.lidar_mount)
        heading = t.rotation @ np.array([1.0, 0.0, 0.0])
        return Pose2D(t.translation[0], t.translation[1], math.atan2(heading[1], heading[0]))

    def world_from_camera(self, robot_pose: Pose2D) -> RigidTransform:
        return compose(pose2d_to_transform(robot_pose), self.camera_mount)


def simulate_lidar(world: WorldModel, robot_pose: Pose2D, rig: SensorRig) -> LaserScan:
    """Horizontal scan in the LiDAR's mounting plane; misses read ``inf``."""
    n = int(math.floor((rig.lidar_angle_max - rig.lidar_angle_min) / rig.lidar_angle_increment + 1e-9)) + 1
    angles = rig.lidar_angle_min + rig.lidar_angle_increment * np.arange(n)
    local = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(n)])
    t = compose(pose2d_to_transform(robot_pose), rig.lidar_mount)
    dirs = local @ t.rotation.T
    ranges = raycast_many(world, t.translation, dirs, rig.lidar_range_max)
    ranges[ranges < rig.lidar_range_min] = np.inf
    return LaserScan(
        angle_min=rig.lidar_angle_min,
        angle_max=float(angles[-1]),
        angle_increment=rig.lidar_angle_increment,
        range_min=rig.lidar_range_min,
        range_max=rig.lidar_range_max,
        ranges=ranges,
    )


def pixel_rays(k: CameraIntrinsics) -> NDArray[np.float64]:
    """Unit optical-frame ray through every pixel center, shape ``(H*W, 3)``."""
    v, u = np.mgrid[0 : k.height, 0 : k.width]
    d = np.column_stack([((u - k.cx) / k.fx).ravel(), ((v - k.cy) / k.fy).ravel(), np.ones(u.size)])
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def simulate_depth(world: WorldModel, robot_pose: Pose2D, rig: SensorRig, rng_seed: int = 0) -> NDArray[np.float64]:
    """Z-depth image in meters with NaN where nothing is seen within the frustum.

    Noise is drawn from ``numpy.random.default_rng(rng_seed)``, one normal
    sample per pixel in row-major order, so results do not depend on how
    the rays are evaluated.
    """
    k, f = rig.intrinsics, rig.frustum
    rays = pixel_rays(k)
    t = rig.world_from_camera(robot_pose)
    max_range = f.far / float(rays[:, 2].min())
    dist = raycast_many(world, t.translation, rays @ t.rotation.T, max_range)
    z = dist * rays[:, 2]
    noise = np.random.default_rng(rng_seed).standard_normal(z.size)
    hit = np.isfinite(z)
    z[hit] += rig.noise_sigma0 * z[hit] ** 2 * noise[hit]
    z[~hit | (z < f.near) | (z > f.far)] = np.nan
    return z.reshape(k.height, k.width)
