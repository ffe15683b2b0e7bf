"""Integer line traversal over grid cells."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Cells of the line from ``(x0, y0)`` to ``(x1, y1)``, both inclusive.

    Traversal always starts at the first cell.  The minor-axis offset at
    major step ``i`` is ``i * minor / major`` rounded half up, which makes
    the result independent of whether the caller swaps the endpoints'
    roles.
    """
    dx, dy = x1 - x0, y1 - y0
    sx = 1 if dx >= 0 else -1
    sy = 1 if dy >= 0 else -1
    adx, ady = abs(dx), abs(dy)
    cells = []
    if adx >= ady:
        err = adx  # 2 * fractional part scaled by 2 * adx, starts at one half
        y = y0
        for i in range(adx + 1):
            cells.append((x0 + sx * i, y))
            err += 2 * ady
            if err >= 2 * adx:
                y += sy
                err -= 2 * adx
    else:
        err = ady
        x = x0
        for i in range(ady + 1):
            cells.append((x, y0 + sy * i))
            err += 2 * adx
            if err >= 2 * ady:
                x += sx
                err -= 2 * ady
    return cells


def bresenham_many(
    x0: int, y0: int, x1: NDArray[np.int64], y1: NDArray[np.int64]
) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.int64], NDArray[np.int64]]:
    """Vectorized :func:`bresenham` from one start cell to many end cells.

    Returns ``(xs, ys, ray, step)``: the flattened cells of all lines, the
    index of the line each cell belongs to, and its step count from the
    start cell.  Each line's last step is its end cell.
    """
    x1 = np.asarray(x1, dtype=np.int64).reshape(-1)
    y1 = np.asarray(y1, dtype=np.int64).reshape(-1)
    dx, dy = x1 - x0, y1 - y0
    adx, ady = np.abs(dx), np.abs(dy)
    major = np.maximum(adx, ady)
    minor = np.minimum(adx, ady)
    counts = major + 1
    ray = np.repeat(np.arange(len(x1)), counts)
    starts = np.cumsum(counts) - counts
    step = np.arange(int(counts.sum()), dtype=np.int64) - np.repeat(starts, counts)
    maj = np.repeat(major, counts)
    mn = np.repeat(minor, counts)
    safe = np.where(maj == 0, 1, maj)
    offset = (2 * step * mn + safe) // (2 * safe)
    x_major = np.repeat(adx >= ady, counts)
    sx = np.repeat(np.where(dx >= 0, 1, -1), counts)
    sy = np.repeat(np.where(dy >= 0, 1, -1), counts)
    xs = x0 + sx * np.where(x_major, step, offset)
    ys = y0 + sy * np.where(x_major, offset, step)
    return xs, ys, ray, step
