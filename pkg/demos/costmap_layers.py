"""Build LiDAR and camera obstacle layers, inflate them, and plan through the result."""

import numpy as np

from rgbdnav.cli import builtin_scenario
from rgbdnav.costmap import LETHAL, UNKNOWN
from rgbdnav.geometry import Pose2D
from rgbdnav.planner import plan_global
from rgbdnav.sim import load_config
from rgbdnav.sim.robot import RobotState
from rgbdnav.sim.scenario import CostmapStack

cfg = load_config(builtin_scenario("bridge"))
deck = cfg.world.box("bridge_deck")
xmin, ymin, xmax, ymax = deck.footprint
state = RobotState(Pose2D(2.0, 5.0, 0.0), 0.0, 0.0, cfg.robot.radius)

for camera in (False, True):
    stack = CostmapStack(cfg if camera else load_config(builtin_scenario("bridge"), ["camera.enabled=false"]))
    master = stack.update(state, tick=0)
    print(f"camera {'on ' if camera else 'off'}:")
    for name, layer in (("static", stack.static), ("lidar", stack.lidar), ("camera", stack.camera)):
        c = layer.cost
        print(f"  {name:>6}: {(c == LETHAL).sum():4d} lethal {(c == 0).sum():6d} free {(c == UNKNOWN).sum():6d} unknown")
    path = plan_global(master, state.pose, cfg.goal, lethal_threshold=cfg.lethal_threshold)
    w = path.waypoints
    under = np.any((w[:, 0] >= xmin) & (w[:, 0] <= xmax) & (w[:, 1] >= ymin) & (w[:, 1] <= ymax))
    print(f"  plan: {len(w)} waypoints, cost {path.total_cost:.1f}, passes under the deck: {under}")
