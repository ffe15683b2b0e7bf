"""Rigid-body transforms between sensor, robot and world frames.

Frame conventions used throughout the package:

* base / world frames: +x forward, +y left, +z up.
* camera optical frame: +z forward (optical axis), +x right, +y down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

# Fixed offset of the camera body frame with respect to the robot base, in meters.
CAMERA_TRANSLATION_BASE = (0.345, 0.0, 0.28)

# Columns are the optical x, y, z axes expressed in the body (x forward, z up) frame.
BODY_FROM_OPTICAL = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)

_RENORM_EVERY = 32


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def _orthonormalize(r: NDArray[np.float64]) -> NDArray[np.float64]:
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0:
        u[:, -1] *= -1
        out = u @ vt
    return out


def rotation_z(yaw: float) -> NDArray[np.float64]:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_rpy(roll: float, pitch: float, yaw: float) -> NDArray[np.float64]:
    """Rotation matrix for intrinsic Z-Y-X (yaw, pitch, roll) angles in radians."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    return rotation_z(yaw) @ ry @ rx


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; ``yaw`` is wrapped into (-pi, pi] on construction."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", normalize_angle(float(self.yaw)))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """SE(3) transform ``p -> rotation @ p + translation``.

    Instances are immutable. ``depth`` counts how many compositions produced
    the rotation; the matrix is re-orthonormalized every 32 of them.
    """

    rotation: NDArray[np.float64] = field(default_factory=lambda: np.eye(3))
    translation: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    depth: int = 0

    def __post_init__(self) -> None:
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("transform must be finite")
        if np.max(np.abs(r.T @ r - np.eye(3))) > 1e-9 or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant +1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls()

    @classmethod
    def from_translation(cls, x: float, y: float, z: float) -> RigidTransform:
        return cls(np.eye(3), np.array([x, y, z], dtype=float))

    @classmethod
    def from_xyz_rpy(
        cls,
        translation: ArrayLike,
        roll: float = 0.0,
        pitch: float = 0.0,
        yaw: float = 0.0,
    ) -> RigidTransform:
        return cls(rotation_from_rpy(roll, pitch, yaw), np.asarray(translation, dtype=float))

    def as_matrix(self) -> NDArray[np.float64]:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points: ArrayLike) -> NDArray[np.float64]:
        """Transform one point (shape (3,)) or many (shape (N, 3))."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def __matmul__(self, other: RigidTransform) -> RigidTransform:
        return compose(self, other)

    def __repr__(self) -> str:
        return (
            f"RigidTransform(rotation={self.rotation.tolist()}, "
            f"translation={self.translation.tolist()})"
        )


def transform_point(t: RigidTransform, p: ArrayLike) -> NDArray[np.float64]:
    return t.rotation @ np.asarray(p, dtype=float) + t.translation


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return ``a o b``: applying the result equals applying ``b`` then ``a``."""
    r = a.rotation @ b.rotation
    depth = a.depth + b.depth + 1
    if depth >= _RENORM_EVERY:
        r = _orthonormalize(r)
        depth = 0
    return RigidTransform(r, a.rotation @ b.translation + a.translation, depth)


def invert(t: RigidTransform) -> RigidTransform:
    rt = t.rotation.T
    return RigidTransform(rt, -(rt @ t.translation), t.depth)


def pose2d_to_transform(p: Pose2D, z_offset: float = 0.0) -> RigidTransform:
    return RigidTransform(rotation_z(p.yaw), np.array([p.x, p.y, z_offset]))


def camera_mount(
    translation: ArrayLike = CAMERA_TRANSLATION_BASE,
    roll: float = 0.0,
    pitch: float = 0.0,
    yaw: float = 0.0,
) -> RigidTransform:
    """Transform from the camera optical frame to the robot base frame.

    The body mount (translation plus roll/pitch/yaw, all zero rotation by
    default, i.e. a level camera) is followed by the fixed optical-axis
    permutation.
    """
    body = RigidTransform.from_xyz_rpy(translation, roll, pitch, yaw)
    return compose(body, RigidTransform(BODY_FROM_OPTICAL, np.zeros(3)))


def random_transform(rng: np.random.Generator, scale: float = 10.0) -> RigidTransform:
    """Random transform; rotation by QR orthonormalization of a gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return RigidTransform(q, rng.uniform(-scale, scale, 3))
