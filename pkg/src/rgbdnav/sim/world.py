"""Axis-aligned box world and slab-method ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray


@dataclass(frozen=True, eq=False)
class Box:
    min_corner: NDArray[np.float64]
    max_corner: NDArray[np.float64]
    name: str = ""
    static: bool = False

    def __post_init__(self) -> None:
        lo = np.asarray(self.min_corner, dtype=float).reshape(3)
        hi = np.asarray(self.max_corner, dtype=float).reshape(3)
        if not np.all(lo < hi):
            raise ValueError(f"box {self.name!r}: min corner must be below max corner on every axis")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @property
    def footprint(self) -> tuple[float, float, float, float]:
        """Ground-plane rectangle ``(xmin, ymin, xmax, ymax)``."""
        return (self.min_corner[0], self.min_corner[1], self.max_corner[0], self.max_corner[1])

    def z_overlaps(self, zlo: float, zhi: float) -> bool:
        return self.min_corner[2] <= zhi and self.max_corner[2] >= zlo

    def distance_to_footprint(self, x: float, y: float) -> float:
        """Planar distance from a point to the footprint (0 inside)."""
        xmin, ymin, xmax, ymax = self.footprint
        dx = max(xmin - x, 0.0, x - xmax)
        dy = max(ymin - y, 0.0, y - ymax)
        return math.hypot(dx, dy)


@dataclass(frozen=True, eq=False)
class WorldModel:
    boxes: tuple[Box, ...] = ()
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        xmin, ymin, xmax, ymax = self.bounds
        for b in self.boxes:
            bx0, by0, bx1, by1 = b.footprint
            if bx0 < xmin or by0 < ymin or bx1 > xmax or by1 > ymax:
                raise ValueError(f"box {b.name!r} lies outside the world bounds")

    def box(self, name: str) -> Box:
        for b in self.boxes:
            if b.name == name:
                return b
        raise KeyError(name)

    def corners(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        if not self.boxes:
            return np.zeros((0, 3)), np.zeros((0, 3))
        return (np.array([b.min_corner for b in self.boxes]), np.array([b.max_corner for b in self.boxes]))


def raycast_many(
    world: WorldModel | Sequence[Box],
    origins: ArrayLike,
    directions: ArrayLike,
    max_range: float,
) -> NDArray[np.float64]:
    """Distance to the first box surface along each ray, ``inf`` on a miss.

    ``origins`` may be one point or one per ray.  A ray starting inside a
    box hits at distance 0.
    """
    boxes = world.boxes if isinstance(world, WorldModel) else tuple(world)
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    o = np.broadcast_to(np.asarray(origins, dtype=float), d.shape)
    if not boxes:
        return np.full(len(d), np.inf)
    lo = np.array([b.min_corner for b in boxes])
    hi = np.array([b.max_corner for b in boxes])
    t_enter = np.full((len(d), len(boxes)), -np.inf)
    t_exit = np.full((len(d), len(boxes)), np.inf)
    for axis in range(3):
        oa = o[:, axis, None]
        da = d[:, axis, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / da
            t1 = (lo[:, axis] - oa) * inv
            t2 = (hi[:, axis] - oa) * inv
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = da[:, 0] == 0
        if np.any(parallel):
            inside = (oa[parallel] >= lo[:, axis]) & (oa[parallel] <= hi[:, axis])
            near[parallel] = np.where(inside, -np.inf, np.inf)
            far[parallel] = np.where(inside, np.inf, -np.inf)
        np.maximum(t_enter, near, out=t_enter)
        np.minimum(t_exit, far, out=t_exit)
    t = np.maximum(t_enter, 0.0)
    hit = (t_exit >= t) & (t <= max_range)
    return np.where(hit, t, np.inf).min(axis=1)


def raycast(world: WorldModel, origin: ArrayLike, direction: ArrayLike, max_range: float) -> float | None:
    """Distance to the first surface hit, or None on a miss."""
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    t = float(raycast_many(world, origin, d[None], max_range)[0])
    return t if math.isfinite(t) else None
