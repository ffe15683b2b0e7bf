"""Occupancy grids, obstacle layers, inflation and layer composition.

Cell costs are integers in ``[0, 100]``: 0 is free and 100 is lethal
(occupied).  ``UNKNOWN`` (255) marks cells no source has observed.
Grids are indexed ``cost[iy, ix]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import ndimage

from .camera import LaserScan, PointCloud
from .geometry import Pose2D
from .raytrace import bresenham_many

FREE = 0
LETHAL = 100
INSCRIBED = 99
UNKNOWN = 255

# Slack on floor() so points exactly on a cell boundary land in the upper cell
# despite representation error (0.15 / 0.05 == 2.9999999999999996).
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    width: int = 200
    height: int = 200
    resolution: float = 0.05
    origin: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must have at least one cell")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    def to_grid_frame(self, xy: ArrayLike) -> NDArray[np.float64]:
        p = np.asarray(xy, dtype=float)
        dx = p[..., 0] - self.origin.x
        dy = p[..., 1] - self.origin.y
        c, s = math.cos(self.origin.yaw), math.sin(self.origin.yaw)
        return np.stack([c * dx + s * dy, -s * dx + c * dy], axis=-1)

    def cell_indices(self, xy: ArrayLike) -> NDArray[np.int64]:
        """Unbounded integer cell indices ``(ix, iy)`` for world points."""
        g = self.to_grid_frame(xy) / self.resolution
        return np.floor(g + _FLOOR_EPS).astype(np.int64)

    def in_bounds(self, ix: ArrayLike, iy: ArrayLike) -> NDArray[np.bool_]:
        ix, iy = np.asarray(ix), np.asarray(iy)
        return (ix >= 0) & (ix < self.width) & (iy >= 0) & (iy < self.height)

    def cell_center(self, ix: ArrayLike, iy: ArrayLike) -> NDArray[np.float64]:
        gx = (np.asarray(ix, dtype=float) + 0.5) * self.resolution
        gy = (np.asarray(iy, dtype=float) + 0.5) * self.resolution
        c, s = math.cos(self.origin.yaw), math.sin(self.origin.yaw)
        return np.stack([self.origin.x + c * gx - s * gy, self.origin.y + s * gx + c * gy], axis=-1)


class OccupancyGrid:
    """Row-major cost array bound to a :class:`GridSpec`."""

    def __init__(self, spec: GridSpec, cost: ArrayLike | None = None, fill: int = FREE):
        self.spec = spec
        if cost is None:
            self.cost = np.full((spec.height, spec.width), fill, dtype=np.uint8)
        else:
            c = np.array(cost)
            if c.size != spec.width * spec.height:
                raise ValueError(f"cost array has {c.size} cells, spec needs {spec.width * spec.height}")
            c = c.reshape(spec.height, spec.width)
            bad = (c != UNKNOWN) & ((c < 0) | (c > LETHAL))
            if np.any(bad):
                raise ValueError("costs must be in [0, 100] or UNKNOWN")
            self.cost = c.astype(np.uint8)

    def copy(self) -> OccupancyGrid:
        return OccupancyGrid(self.spec, self.cost.copy())

    def __getitem__(self, cell: tuple[int, int]) -> int:
        ix, iy = cell
        return int(self.cost[iy, ix])

    def __setitem__(self, cell: tuple[int, int], value: int) -> None:
        ix, iy = cell
        self.cost[iy, ix] = value

    def __repr__(self) -> str:
        return f"OccupancyGrid({self.spec.width}x{self.spec.height} @ {self.spec.resolution} m)"


@dataclass(frozen=True)
class ObstacleLayerParams:
    """Obstacle-layer settings; defaults are the camera integration values."""

    max_obstacle_height: float = 1.0
    min_obstacle_height: float = 0.35
    obstacle_range: float = 2.0
    raytrace_range: float = 2.0
    marking: bool = True
    clearing: bool = True

    def __post_init__(self) -> None:
        if not self.min_obstacle_height < self.max_obstacle_height:
            raise ValueError("min_obstacle_height must be below max_obstacle_height")
        if not (self.obstacle_range > 0 and self.raytrace_range > 0):
            raise ValueError("obstacle_range and raytrace_range must be positive")


@dataclass(frozen=True)
class InflationParams:
    inscribed_radius: float = 0.3
    inflation_radius: float = 0.8
    decay: float = 5.0

    def __post_init__(self) -> None:
        if not 0 < self.inscribed_radius <= self.inflation_radius:
            raise ValueError("need 0 < inscribed_radius <= inflation_radius")
        if not self.decay > 0:
            raise ValueError("decay must be positive")


def world_to_cell(spec: GridSpec, x: float, y: float) -> tuple[int, int] | None:
    """Cell ``(ix, iy)`` containing the point, or None when outside the grid."""
    ix, iy = spec.cell_indices((x, y))
    if not spec.in_bounds(ix, iy):
        return None
    return int(ix), int(iy)


def obstacle_mask(points: ArrayLike, sensor_xy: ArrayLike, params: ObstacleLayerParams) -> NDArray[np.bool_]:
    """Points that qualify as obstacles: inside the height band and within range."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    sx, sy = sensor_xy
    planar = np.hypot(p[:, 0] - sx, p[:, 1] - sy)
    z = p[:, 2]
    return (
        (z >= params.min_obstacle_height)
        & (z <= params.max_obstacle_height)
        & (planar <= params.obstacle_range)
    )


def _set_cells(grid: OccupancyGrid, ix: NDArray[np.int64], iy: NDArray[np.int64], value: int) -> int:
    keep = grid.spec.in_bounds(ix, iy)
    if not np.any(keep):
        return 0
    flat = iy[keep] * grid.spec.width + ix[keep]
    touched = np.zeros(grid.cost.size, dtype=bool)
    touched[flat] = True
    grid.cost.reshape(-1)[touched] = value
    return int(touched.sum())


def mark_from_pointcloud(
    grid: OccupancyGrid,
    cloud: PointCloud | ArrayLike,
    sensor_xy: ArrayLike,
    params: ObstacleLayerParams,
) -> int:
    """Mark the cells of in-band, in-range points as lethal.

    The cloud must share the grid's planar frame with z measured up from the
    ground.  Returns the number of distinct cells marked.
    """
    if not params.marking:
        return 0
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float).reshape(-1, 3)
    hits = pts[obstacle_mask(pts, sensor_xy, params)]
    if len(hits) == 0:
        return 0
    ix, iy = grid.spec.cell_indices(hits[:, :2]).T
    return _set_cells(grid, ix, iy, LETHAL)


def _raytrace(
    grid: OccupancyGrid,
    sensor_xy: ArrayLike,
    endpoints: NDArray[np.float64],
    raytrace_range: float,
    is_return: NDArray[np.bool_],
) -> int:
    if len(endpoints) == 0:
        return 0
    sensor = np.asarray(sensor_xy, dtype=float)
    delta = endpoints - sensor
    dist = np.hypot(delta[:, 0], delta[:, 1])
    truncated = dist > raytrace_range
    scale = np.where(truncated, raytrace_range / np.where(dist > 0, dist, 1.0), 1.0)
    ends = sensor + delta * scale[:, None]
    # A ray cut short by raytrace_range ends in free space, so its last cell is
    # cleared too; a genuine return keeps its own cell.
    keep_last = is_return & ~truncated

    sx, sy = grid.spec.cell_indices(sensor)
    ex, ey = grid.spec.cell_indices(ends).T
    # Many rays share an end cell; trace each distinct one once.  A cell that
    # any return ended in stays uncleared.
    key = (ex - ex.min()) * (ey.max() - ey.min() + 1) + (ey - ey.min())
    _, first, inverse = np.unique(key, return_index=True, return_inverse=True)
    keep = np.zeros(len(first), dtype=bool)
    np.logical_or.at(keep, inverse.reshape(-1), keep_last)
    ex, ey, keep_last = ex[first], ey[first], keep
    xs, ys, ray, step = bresenham_many(int(sx), int(sy), ex, ey)
    last = step == np.maximum(np.abs(ex - sx), np.abs(ey - sy))[ray]
    drop = last & keep_last[ray]
    return _set_cells(grid, xs[~drop], ys[~drop], FREE)


def clear_by_raytrace(
    grid: OccupancyGrid,
    sensor_xy: ArrayLike,
    endpoints: ArrayLike,
    params: ObstacleLayerParams,
) -> int:
    """Free every cell from the sensor cell up to, but excluding, each endpoint cell.

    Endpoints farther than ``raytrace_range`` are pulled back onto that
    distance along their ray; the cell at the cut is then cleared as well.
    Returns the number of distinct cells set free.
    """
    if not params.clearing:
        return 0
    ends = np.asarray(endpoints, dtype=float).reshape(-1, 2)
    return _raytrace(grid, sensor_xy, ends, params.raytrace_range, np.ones(len(ends), dtype=bool))


def mark_from_laserscan(
    grid: OccupancyGrid,
    scan: LaserScan,
    sensor_pose: Pose2D,
    params: ObstacleLayerParams,
) -> int:
    """Clear along every ray, then mark returns within ``obstacle_range``.

    Rays without a return clear out to ``raytrace_range``.  Returns the
    number of cells marked.
    """
    angles = scan.angles + sensor_pose.yaw
    ranges = scan.ranges
    finite = np.isfinite(ranges)
    reach = np.where(finite, ranges, params.raytrace_range)
    sensor = np.array([sensor_pose.x, sensor_pose.y])
    ends = sensor + np.column_stack([reach * np.cos(angles), reach * np.sin(angles)])

    if params.clearing:
        _raytrace(grid, sensor, ends, params.raytrace_range, finite)
    if not params.marking:
        return 0
    hit = finite & (ranges <= params.obstacle_range)
    if not np.any(hit):
        return 0
    ix, iy = grid.spec.cell_indices(ends[hit]).T
    return _set_cells(grid, ix, iy, LETHAL)


def inflation_cost(d: ArrayLike, params: InflationParams) -> NDArray[np.int64]:
    """Cost contributed at distance ``d`` (meters) from the nearest lethal cell."""
    d = np.asarray(d, dtype=float)
    eps = 1e-9
    decayed = np.floor(98.0 * np.exp(-params.decay * (d - params.inscribed_radius)) + 0.5)
    out = np.where(d <= params.inflation_radius + eps, decayed, 0.0)
    out = np.where(d <= params.inscribed_radius + eps, INSCRIBED, out)
    out = np.where(d == 0, LETHAL, out)
    return out.astype(np.int64)


def inflate(grid: OccupancyGrid, params: InflationParams) -> OccupancyGrid:
    """Spread decaying cost around lethal cells; the input grid is not modified."""
    lethal = grid.cost == LETHAL
    if not np.any(lethal):
        return grid.copy()
    dist = ndimage.distance_transform_edt(~lethal, sampling=grid.spec.resolution)
    contrib = inflation_cost(dist, params)
    cost = grid.cost.astype(np.int64)
    unknown = cost == UNKNOWN
    out = np.maximum(np.where(unknown, 0, cost), contrib)
    out = np.where(unknown & (contrib == 0), UNKNOWN, out)
    return OccupancyGrid(grid.spec, out.astype(np.uint8))


def compose_layers(layers: Sequence[OccupancyGrid] | Iterable[OccupancyGrid]) -> OccupancyGrid:
    """Per-cell maximum over layers; UNKNOWN only survives where every layer is UNKNOWN."""
    layers = list(layers)
    if not layers:
        raise ValueError("need at least one layer")
    spec = layers[0].spec
    for layer in layers[1:]:
        if layer.spec != spec:
            raise ValueError(f"layer spec {layer.spec} differs from {spec}")
    stack = np.stack([layer.cost.astype(np.int16) for layer in layers])
    known = stack != UNKNOWN
    best = np.max(np.where(known, stack, -1), axis=0)
    out = np.where(best < 0, UNKNOWN, best)
    return OccupancyGrid(spec, out.astype(np.uint8))


def rasterize_footprint(grid: OccupancyGrid, xmin: float, ymin: float, xmax: float, ymax: float) -> int:
    """Mark every cell whose center lies inside the axis-aligned rectangle."""
    spec = grid.spec
    iy, ix = np.mgrid[0 : spec.height, 0 : spec.width]
    centers = spec.cell_center(ix, iy)
    inside = (
        (centers[..., 0] >= xmin) & (centers[..., 0] <= xmax)
        & (centers[..., 1] >= ymin) & (centers[..., 1] <= ymax)
    )
    grid.cost[inside] = LETHAL
    return int(inside.sum())
