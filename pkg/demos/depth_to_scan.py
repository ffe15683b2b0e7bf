"""Turn a simulated depth image into a planar laser scan and a point cloud."""

import numpy as np

from rgbdnav.camera import depth_image_to_laserscan, depth_image_to_pointcloud, to_planar_scan
from rgbdnav.cli import builtin_scenario
from rgbdnav.geometry import Pose2D
from rgbdnav.sim import load_config, simulate_depth

cfg = load_config(builtin_scenario("bridge"))
k = cfg.rig.intrinsics
pose = Pose2D(2.0, 5.0, 0.0)  # about 1.5 m in front of the deck
depth = simulate_depth(cfg.world, pose, cfg.rig, rng_seed=1)
print(f"depth image {depth.shape}, valid pixels {np.isfinite(depth).sum()}")

# A band of rows around the image center collapses to one range per column.
scan = to_planar_scan(depth_image_to_laserscan(depth, k, k.height // 2, 10, 0.3, 3.0))
hits = np.isfinite(scan.ranges)
print(f"scan: {len(scan.ranges)} beams over [{scan.angle_min:.3f}, {scan.angle_max:.3f}] rad, {hits.sum()} returns")

# The same image as a 3D cloud in the robot base frame.
cloud = depth_image_to_pointcloud(depth, k, cfg.rig.frustum).transformed(cfg.rig.camera_mount, "base")
z = cloud.points[:, 2]
print(f"cloud: {len(z)} points, heights {z.min():.2f} to {z.max():.2f} m in the base frame")
print(f"points between 0.35 m and 1.0 m (what the camera layer marks): {((z >= 0.35) & (z <= 1.0)).sum()}")
