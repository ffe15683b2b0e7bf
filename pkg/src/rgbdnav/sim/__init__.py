from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .robot import RobotState, step_robot
from .scenario import COLLISION, GOAL, TIMEOUT, ScenarioReport, run_scenario
from .sensors import SensorRig, simulate_depth, simulate_lidar
from .world import Box, WorldModel, raycast, raycast_many

__all__ = [
    "Box", "COLLISION", "ConfigError", "GOAL", "RobotState", "ScenarioConfig", "ScenarioReport",
    "SensorRig", "TIMEOUT", "WorldModel", "load_config", "parse_config", "raycast", "raycast_many",
    "run_scenario", "simulate_depth", "simulate_lidar", "step_robot",
]
