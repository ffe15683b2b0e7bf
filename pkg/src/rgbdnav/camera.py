"""Pinhole camera model, frustum culling and depth-image conversions.

Depth images are ``(height, width)`` float arrays of z-depth in meters;
``NaN`` marks pixels without a return.  Zeros and other non-finite values
are treated as "no return" on ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import RigidTransform

# Camera with the aspect-consistent axis reading of the 87 x 58 degree FOV.
DEFAULT_WIDTH = 160
DEFAULT_HEIGHT = 90
DEFAULT_HFOV = math.radians(87.0)
DEFAULT_VFOV = math.radians(58.0)
DEFAULT_NEAR = 0.3
DEFAULT_FAR = 3.0


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @property
    def hfov(self) -> float:
        return 2.0 * math.atan(self.width / (2.0 * self.fx))

    @property
    def vfov(self) -> float:
        return 2.0 * math.atan(self.height / (2.0 * self.fy))

    def project(self, points: ArrayLike) -> NDArray[np.float64]:
        """Pixel coordinates ``(u, v)`` of optical-frame points."""
        p = np.asarray(points, dtype=float)
        u = self.fx * p[..., 0] / p[..., 2] + self.cx
        v = self.fy * p[..., 1] / p[..., 2] + self.cy
        return np.stack([u, v], axis=-1)


@dataclass(frozen=True)
class Frustum:
    near: float = DEFAULT_NEAR
    far: float = DEFAULT_FAR
    hfov: float = DEFAULT_HFOV
    vfov: float = DEFAULT_VFOV

    def __post_init__(self) -> None:
        if not 0 < self.near < self.far:
            raise ValueError("need 0 < near < far")
        if not (0 < self.hfov < math.pi and 0 < self.vfov < math.pi):
            raise ValueError("fields of view must lie in (0, pi)")


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: NDArray[np.float64]
    frame_id: str = "camera"

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite points")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def transformed(self, t: RigidTransform, frame_id: str) -> PointCloud:
        return PointCloud(t.apply(self.points), frame_id)


@dataclass(frozen=True, eq=False)
class LaserScan:
    """Planar range scan.  ``inf`` in ``ranges`` means no return.

    Uniformly spaced scans derive their bearings from ``angle_min`` and
    ``angle_increment``.  Scans built from depth images carry one bearing
    per image column in ``explicit_angles`` since those are not uniform.
    """

    angle_min: float
    angle_max: float
    angle_increment: float
    range_min: float
    range_max: float
    ranges: NDArray[np.float64]
    explicit_angles: NDArray[np.float64] | None = field(default=None)

    def __post_init__(self) -> None:
        r = np.asarray(self.ranges, dtype=float).reshape(-1)
        object.__setattr__(self, "ranges", r)
        if self.angle_increment <= 0:
            raise ValueError("angle_increment must be positive")
        expected = int(math.floor((self.angle_max - self.angle_min) / self.angle_increment + 1e-9)) + 1
        if len(r) != expected:
            raise ValueError(f"expected {expected} ranges, got {len(r)}")
        finite = r[np.isfinite(r)]
        if np.any((finite < self.range_min) | (finite > self.range_max)):
            raise ValueError("finite ranges must lie within [range_min, range_max]")
        if self.explicit_angles is not None:
            a = np.asarray(self.explicit_angles, dtype=float).reshape(-1)
            if len(a) != len(r):
                raise ValueError("explicit_angles length must match ranges")
            object.__setattr__(self, "explicit_angles", a)

    @property
    def angles(self) -> NDArray[np.float64]:
        if self.explicit_angles is not None:
            return self.explicit_angles
        return self.angle_min + self.angle_increment * np.arange(len(self.ranges))

    def __len__(self) -> int:
        return len(self.ranges)


def intrinsics_from_fov(width: int, height: int, hfov: float, vfov: float) -> CameraIntrinsics:
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    if not (0 < hfov < math.pi and 0 < vfov < math.pi):
        raise ValueError("fields of view must lie in (0, pi)")
    return CameraIntrinsics(
        width=width,
        height=height,
        fx=(width / 2.0) / math.tan(hfov / 2.0),
        fy=(height / 2.0) / math.tan(vfov / 2.0),
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
    )


def default_intrinsics() -> CameraIntrinsics:
    return intrinsics_from_fov(DEFAULT_WIDTH, DEFAULT_HEIGHT, DEFAULT_HFOV, DEFAULT_VFOV)


def frustum_mask(f: Frustum, points: ArrayLike) -> NDArray[np.bool_]:
    """Vectorized :func:`frustum_contains` over an ``(N, 3)`` array."""
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    return (
        (z >= f.near)
        & (z <= f.far)
        & (np.abs(np.arctan2(x, z)) <= f.hfov / 2.0)
        & (np.abs(np.arctan2(y, z)) <= f.vfov / 2.0)
    )


def frustum_contains(f: Frustum, p: ArrayLike) -> bool:
    return bool(frustum_mask(f, p)[0])


def deproject(k: CameraIntrinsics, u: float, v: float, depth: float) -> NDArray[np.float64]:
    if not (depth > 0 and math.isfinite(depth)):
        raise ValueError(f"depth must be positive and finite, got {depth}")
    if not (0 <= u < k.width and 0 <= v < k.height):
        raise ValueError(f"pixel ({u}, {v}) outside {k.width}x{k.height} image")
    return np.array([(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth])


def sanitize_depth(depths: ArrayLike) -> NDArray[np.float64]:
    """Copy of ``depths`` with every invalid value replaced by NaN."""
    d = np.array(depths, dtype=float)
    d[~np.isfinite(d) | (d <= 0)] = np.nan
    return d


def _check_dims(img: NDArray[np.float64], k: CameraIntrinsics) -> None:
    if img.ndim != 2 or img.shape != (k.height, k.width):
        raise ValueError(
            f"depth image shape {img.shape} does not match intrinsics ({k.height}, {k.width})"
        )


def depth_image_to_pointcloud(
    img: ArrayLike, k: CameraIntrinsics, f: Frustum, frame_id: str = "camera"
) -> PointCloud:
    """Deproject every valid pixel and keep the points inside the frustum."""
    d = sanitize_depth(img)
    _check_dims(d, k)
    v, u = np.nonzero(np.isfinite(d))
    z = d[v, u]
    pts = np.column_stack([(u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z])
    return PointCloud(pts[frustum_mask(f, pts)], frame_id)


def depth_image_to_laserscan(
    img: ArrayLike,
    k: CameraIntrinsics,
    band_center_row: int,
    band_height: int,
    range_min: float,
    range_max: float,
) -> LaserScan:
    """Reduce a horizontal band of a depth image to one range per column.

    Each column keeps its closest valid depth over the band rows.  Bearings
    follow ``atan2(x, z)`` in the optical frame, so positive angles point to
    the right of the optical axis; use :func:`to_planar_scan` for the
    counter-clockwise convention of the base frame.
    """
    d = sanitize_depth(img)
    _check_dims(d, k)
    if band_height < 1:
        raise ValueError("band_height must be at least 1")
    top = band_center_row - band_height // 2
    bottom = top + band_height
    if top < 0 or bottom > k.height:
        raise ValueError(f"band rows [{top}, {bottom}) outside image of height {k.height}")

    band = d[top:bottom]
    has_return = np.any(np.isfinite(band), axis=0)
    z = np.full(k.width, np.nan)
    z[has_return] = np.nanmin(band[:, has_return], axis=0)

    xn = (np.arange(k.width) - k.cx) / k.fx
    angles = np.arctan2(xn, 1.0)
    ranges = np.hypot(xn * z, z)
    ranges[~np.isfinite(ranges) | (ranges < range_min) | (ranges > range_max)] = np.inf

    n = k.width
    increment = (angles[-1] - angles[0]) / (n - 1) if n > 1 else 1.0 / k.fx
    return LaserScan(
        angle_min=float(angles[0]),
        angle_max=float(angles[-1]),
        angle_increment=float(increment),
        range_min=range_min,
        range_max=range_max,
        ranges=ranges,
        explicit_angles=angles,
    )


def to_planar_scan(scan: LaserScan) -> LaserScan:
    """Mirror an optical-frame scan into counter-clockwise bearings."""
    angles = -scan.angles[::-1]
    return LaserScan(
        angle_min=float(angles[0]),
        angle_max=float(angles[-1]),
        angle_increment=scan.angle_increment,
        range_min=scan.range_min,
        range_max=scan.range_max,
        ranges=scan.ranges[::-1].copy(),
        explicit_angles=angles,
    )
