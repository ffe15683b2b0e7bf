"""Grid path planning over a costmap, replan checks and a pure-pursuit follower."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .costmap import LETHAL, UNKNOWN, OccupancyGrid
from .geometry import Pose2D, normalize_angle

# Divisor in the per-step weight 1 + cost / COST_SCALE.
COST_SCALE = 25.0

_SQRT2 = math.sqrt(2.0)
_MOVES4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
_MOVES8 = _MOVES4 + ((1, 1), (-1, 1), (1, -1), (-1, -1))


class PlanningError(ValueError):
    """Raised for invalid planning requests (endpoints off-grid, lethal start)."""


@dataclass(frozen=True, eq=False)
class Path:
    waypoints: NDArray[np.float64]
    total_cost: float
    cells: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def steps(self) -> int:
        return len(self.cells) - 1


@dataclass(frozen=True)
class VelocityCommand:
    v: float = 0.0
    omega: float = 0.0


def _cell_of(grid: OccupancyGrid, pose: Pose2D, what: str) -> tuple[int, int]:
    ix, iy = grid.spec.cell_indices((pose.x, pose.y))
    if not grid.spec.in_bounds(ix, iy):
        raise PlanningError(f"{what} ({pose.x:.3f}, {pose.y:.3f}) is outside the grid")
    return int(ix), int(iy)


def plan_global(
    grid: OccupancyGrid,
    start: Pose2D,
    goal: Pose2D,
    lethal_threshold: int = LETHAL,
    connectivity: int = 8,
    unknown_cost: int = 50,
    use_astar: bool = False,
) -> Path | None:
    """Minimum-cost cell path from ``start`` to ``goal``, or None if unreachable.

    Moving into a cell costs the step length in cells (1 or sqrt(2)) times
    ``1 + cost / 25``.  Cells at or above ``lethal_threshold`` are blocked and
    a diagonal move is refused when both cells it cuts past are blocked.
    Equal-cost frontier entries are expanded by lower y, then lower x.
    ``use_astar`` adds the Euclidean cell distance as an admissible
    heuristic; it returns the same optimal cost.
    """
    if connectivity not in (4, 8):
        raise PlanningError("connectivity must be 4 or 8")
    sx, sy = _cell_of(grid, start, "start")
    gx, gy = _cell_of(grid, goal, "goal")

    w, h = grid.spec.width, grid.spec.height
    raw = grid.cost.astype(np.int64)
    cost = np.where(raw == UNKNOWN, unknown_cost, raw)
    blocked = (cost >= lethal_threshold).tolist()
    weight = (1.0 + cost / COST_SCALE).tolist()
    if blocked[sy][sx]:
        raise PlanningError(f"start cell ({sx}, {sy}) is lethal")
    if blocked[gy][gx]:
        return None

    moves = _MOVES8 if connectivity == 8 else _MOVES4
    INF = math.inf
    g = [[INF] * w for _ in range(h)]
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed = [[False] * w for _ in range(h)]

    def heuristic(x: int, y: int) -> float:
        return math.hypot(x - gx, y - gy) if use_astar else 0.0

    g[sy][sx] = 0.0
    frontier = [(heuristic(sx, sy), sy, sx)]
    while frontier:
        _, y, x = heapq.heappop(frontier)
        if closed[y][x]:
            continue
        closed[y][x] = True
        if (x, y) == (gx, gy):
            break
        base = g[y][x]
        for dx, dy in moves:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny][nx] or closed[ny][nx]:
                continue
            if dx and dy:
                if blocked[y][nx] and blocked[ny][x]:
                    continue
                step = _SQRT2
            else:
                step = 1.0
            cand = base + step * weight[ny][nx]
            if cand < g[ny][nx]:
                g[ny][nx] = cand
                parent[(nx, ny)] = (x, y)
                heapq.heappush(frontier, (cand + heuristic(nx, ny), ny, nx))

    if not closed[gy][gx]:
        return None
    cells = [(gx, gy)]
    while cells[-1] != (sx, sy):
        cells.append(parent[cells[-1]])
    cells.reverse()
    arr = np.array(cells)
    waypoints = grid.spec.cell_center(arr[:, 0], arr[:, 1]).reshape(-1, 2)
    return Path(waypoints, float(g[gy][gx]), tuple(cells))


def needs_replan(path: Path, grid: OccupancyGrid, lethal_threshold: int = LETHAL, from_index: int = 0) -> bool:
    """True if any waypoint from ``from_index`` on sits on a lethal cell."""
    if from_index >= len(path.cells):
        return False
    cells = np.array(path.cells[from_index:])
    return bool(np.any(grid.cost[cells[:, 1], cells[:, 0]] >= lethal_threshold))


def nearest_index(path: Path, x: float, y: float, from_index: int = 0) -> int:
    d = np.hypot(path.waypoints[from_index:, 0] - x, path.waypoints[from_index:, 1] - y)
    return from_index + int(np.argmin(d))


def follow(
    path: Path,
    pose: Pose2D,
    lookahead: float,
    v_max: float,
    omega_max: float,
    gain: float = 1.0,
    from_index: int = 0,
) -> VelocityCommand:
    """Pure-pursuit style command toward the path.

    The target is the first waypoint past the nearest one that is at least
    ``lookahead`` from the robot, or the final waypoint.
    """
    if len(path.waypoints) == 0:
        raise ValueError("cannot follow an empty path")
    i = nearest_index(path, pose.x, pose.y, from_index)
    rest = path.waypoints[i:]
    far = np.nonzero(np.hypot(rest[:, 0] - pose.x, rest[:, 1] - pose.y) >= lookahead)[0]
    tx, ty = rest[far[0]] if len(far) else rest[-1]
    if math.hypot(tx - pose.x, ty - pose.y) == 0.0:
        return VelocityCommand(0.0, 0.0)
    err = normalize_angle(math.atan2(ty - pose.y, tx - pose.x) - pose.yaw)
    omega = max(-omega_max, min(omega_max, gain * err))
    v = v_max * max(0.0, math.cos(err))
    return VelocityCommand(v, omega)
