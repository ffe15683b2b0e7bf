"""Independent reference implementations used as test oracles."""

from __future__ import annotations

import collections
import math

import numpy as np

from rgbdnav.camera import deproject


def scan_oracle(depth, k, band_center_row, band_height, range_min, range_max):
    """Per-pixel deprojection and per-column minimum range, in plain loops."""
    top = band_center_row - band_height // 2
    ranges = []
    angles = []
    for u in range(k.width):
        best = math.inf
        for v in range(top, top + band_height):
            z = depth[v][u]
            if not (math.isfinite(z) and z > 0):
                continue
            x, _, zz = deproject(k, u, v, z)
            best = min(best, math.hypot(x, zz))
        if not (range_min <= best <= range_max):
            best = math.inf
        ranges.append(best)
        angles.append(math.atan2((u - k.cx) / k.fx, 1.0))
    return np.array(angles), np.array(ranges)


def bfs_steps(blocked, start, goal, connectivity=4):
    """Shortest step count on a grid of booleans indexed [y][x]; None if unreachable."""
    h, w = len(blocked), len(blocked[0])
    moves = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if connectivity == 8:
        moves += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    dist = {start: 0}
    q = collections.deque([start])
    while q:
        x, y = q.popleft()
        if (x, y) == goal:
            return dist[(x, y)]
        for dx, dy in moves:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and not blocked[ny][nx] and (nx, ny) not in dist:
                if dx and dy and blocked[y][nx] and blocked[ny][x]:
                    continue
                dist[(nx, ny)] = dist[(x, y)] + 1
                q.append((nx, ny))
    return None


def first_hit_bisection(boxes, origin, direction, max_range, samples=4000, iters=60):
    """Coarse march plus bisection for the first entry into any box."""
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)

    def inside(t):
        p = o + t * d
        return any(np.all(p >= b.min_corner) and np.all(p <= b.max_corner) for b in boxes)

    if inside(0.0):
        return 0.0
    ts = max_range * np.arange(1, samples + 1) / samples
    pts = o + ts[:, None] * d
    hit = np.zeros(samples, dtype=bool)
    for b in boxes:
        hit |= np.all((pts >= b.min_corner) & (pts <= b.max_corner), axis=1)
    if not hit.any():
        return None
    i = int(np.argmax(hit))
    lo, hi = (ts[i - 1] if i else 0.0), ts[i]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi
