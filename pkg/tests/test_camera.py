import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgbdnav.camera import (
    CameraIntrinsics,
    Frustum,
    LaserScan,
    default_intrinsics,
    deproject,
    depth_image_to_laserscan,
    depth_image_to_pointcloud,
    frustum_contains,
    frustum_mask,
    intrinsics_from_fov,
    to_planar_scan,
)

from oracles import scan_oracle

FX_87 = 80.0 / math.tan(math.radians(43.5))


def test_fx_for_87_degrees():
    k = intrinsics_from_fov(160, 90, math.radians(87), math.radians(58))
    assert k.fx == pytest.approx(84.303, abs=1e-3)
    assert k.fx == pytest.approx(FX_87, rel=1e-15)
    assert (k.cx, k.cy) == (79.5, 44.5)
    assert k.hfov == pytest.approx(math.radians(87), abs=1e-12)
    assert k.vfov == pytest.approx(math.radians(58), abs=1e-12)


def test_fx_for_90_degrees():
    assert intrinsics_from_fov(2, 2, math.pi / 2, math.pi / 2).fx == pytest.approx(1.0, abs=1e-15)


def test_default_resolution_is_16_by_9():
    k = default_intrinsics()
    assert k.width * 9 == k.height * 16


@pytest.mark.parametrize("args", [(0, 90, 1.0, 1.0), (160, 90, 0.0, 1.0), (160, 90, 1.0, math.pi)])
def test_intrinsics_reject_bad_input(args):
    with pytest.raises(ValueError):
        intrinsics_from_fov(*args)


def test_frustum_examples():
    f = Frustum(0.3, 3.0)
    assert frustum_contains(f, (0, 0, 1.0))
    assert not frustum_contains(f, (0, 0, 0.2))
    assert not frustum_contains(f, (0, 0, 3.5))
    with pytest.raises(ValueError):
        Frustum(0.5, 0.4)


def test_deproject_examples():
    k = intrinsics_from_fov(160, 90, math.radians(87), math.radians(58))
    assert deproject(k, k.cx, k.cy, 2.0).tolist() == [0.0, 0.0, 2.0]
    k2 = CameraIntrinsics(160, 90, 84.303, 84.303, 79.5, 44.5)
    x, y, z = deproject(k2, 0, 44.5, 1.0)
    assert x == pytest.approx(-79.5 / 84.303, abs=1e-12)
    assert x == pytest.approx(-0.9431, abs=1e-4)
    assert (y, z) == (0.0, 1.0)
    a = deproject(k, 10, 20, 1.5)
    b = deproject(k, 10, 20, 3.0)
    assert np.array_equal(b[:2], 2 * a[:2])
    with pytest.raises(ValueError):
        deproject(k, 0, 0, 0.0)


@settings(max_examples=200)
@given(
    u=st.floats(0, 159.999), v=st.floats(0, 89.999), depth=st.floats(0.01, 50.0)
)
def test_projection_inverts_deprojection(u, v, depth):
    k = default_intrinsics()
    uv = k.project(deproject(k, u, v, depth))
    assert abs(uv[0] - u) <= 1e-9 and abs(uv[1] - v) <= 1e-9


@settings(max_examples=200)
@given(
    x=st.floats(-3, 3), y=st.floats(-3, 3), z=st.floats(0.31, 2.9), s=st.floats(0.1, 10)
)
def test_frustum_angular_membership_is_scale_invariant(x, y, z, s):
    f = Frustum(0.3, 3.0)
    p = np.array([x, y, z])
    q = p * s
    if f.near <= q[2] <= f.far:
        assert frustum_contains(f, p) == frustum_contains(f, q)


def test_pointcloud_examples():
    k = default_intrinsics()
    f = Frustum()
    assert len(depth_image_to_pointcloud(np.full((90, 160), np.nan), k, f)) == 0
    assert len(depth_image_to_pointcloud(np.zeros((90, 160)), k, f)) == 0
    k_odd = intrinsics_from_fov(161, 91, math.radians(87), math.radians(58))
    img = np.full((91, 161), np.nan)
    img[45, 80] = 1.0
    cloud = depth_image_to_pointcloud(img, k_odd, f)
    assert cloud.points.tolist() == [[0.0, 0.0, 1.0]]
    assert len(depth_image_to_pointcloud(np.full((90, 160), 5.0), k, f)) == 0
    with pytest.raises(ValueError):
        depth_image_to_pointcloud(np.ones((90, 161)), k, f)


def test_pointcloud_points_lie_in_frustum():
    rng = np.random.default_rng(5)
    k = default_intrinsics()
    f = Frustum()
    img = rng.uniform(0.1, 4.0, (90, 160))
    img[rng.random((90, 160)) < 0.2] = np.nan
    cloud = depth_image_to_pointcloud(img, k, f)
    assert len(cloud) > 0
    assert np.all(frustum_mask(f, cloud.points))
    valid = np.isfinite(img) & (img >= f.near) & (img <= f.far)
    assert len(cloud) <= valid.sum()


def test_scan_single_on_axis_column():
    k = CameraIntrinsics(1, 1, 1.0, 1.0, 0.0, 0.0)
    scan = depth_image_to_laserscan(np.array([[2.0]]), k, 0, 1, 0.1, 10.0)
    assert scan.angles.tolist() == [0.0]
    assert scan.ranges.tolist() == [2.0]


def test_scan_hand_computed_column():
    k = CameraIntrinsics(160, 90, 84.303, 84.303, 79.5, 44.5)
    img = np.full((90, 160), np.nan)
    img[44, 120] = 2.0
    scan = depth_image_to_laserscan(img, k, 44, 1, 0.3, 3.0)
    assert scan.angles[120] == pytest.approx(0.4478, abs=1e-4)
    assert scan.ranges[120] == pytest.approx(2.2189, abs=1e-4)
    assert scan.ranges[120] == pytest.approx(math.hypot(40.5 / 84.303 * 2.0, 2.0), abs=1e-12)
    assert np.isinf(np.delete(scan.ranges, 120)).all()


def test_scan_angles_strictly_increase_and_band_checks():
    k = default_intrinsics()
    scan = depth_image_to_laserscan(np.ones((90, 160)), k, 45, 5, 0.3, 3.0)
    assert np.all(np.diff(scan.angles) > 0)
    assert len(scan) == 160
    with pytest.raises(ValueError):
        depth_image_to_laserscan(np.ones((90, 160)), k, 1, 5, 0.3, 3.0)
    with pytest.raises(ValueError):
        depth_image_to_laserscan(np.ones((90, 160)), k, 45, 0, 0.3, 3.0)


def test_scan_range_limits_become_sentinel():
    k = default_intrinsics()
    img = np.full((90, 160), 5.0)
    img[:, :10] = 0.1
    scan = depth_image_to_laserscan(img, k, 45, 3, 0.3, 3.0)
    assert np.isinf(scan.ranges).all()


@pytest.mark.parametrize("seed", range(10))
def test_scan_matches_bruteforce_oracle(seed):
    rng = np.random.default_rng(seed)
    k = default_intrinsics()
    img = rng.uniform(0.2, 4.0, (90, 160))
    img[rng.random(img.shape) < 0.3] = np.nan
    row, band = int(rng.integers(5, 85)), int(rng.integers(1, 10))
    scan = depth_image_to_laserscan(img, k, row, band, 0.3, 3.0)
    angles, ranges = scan_oracle(img, k, row, band, 0.3, 3.0)
    assert np.array_equal(np.isinf(scan.ranges), np.isinf(ranges))
    finite = np.isfinite(ranges)
    assert np.max(np.abs(scan.ranges[finite] - ranges[finite]), initial=0) <= 1e-9
    assert np.max(np.abs(scan.angles - angles)) <= 1e-12


def test_planar_scan_mirrors_bearings():
    k = default_intrinsics()
    img = np.full((90, 160), np.nan)
    img[45, 150] = 1.0  # right of the optical axis
    scan = to_planar_scan(depth_image_to_laserscan(img, k, 45, 1, 0.3, 3.0))
    hit = np.isfinite(scan.ranges)
    assert scan.angles[hit][0] < 0
    assert np.all(np.diff(scan.angles) > 0)


def test_laserscan_length_invariant():
    with pytest.raises(ValueError):
        LaserScan(0.0, 1.0, 0.5, 0.1, 5.0, [1.0, 1.0])
    with pytest.raises(ValueError):
        LaserScan(0.0, 1.0, 0.5, 0.1, 5.0, [1.0, 1.0, 9.0])
    scan = LaserScan(0.0, 1.0, 0.5, 0.1, 5.0, [1.0, np.inf, 2.0])
    assert scan.angles.tolist() == [0.0, 0.5, 1.0]
