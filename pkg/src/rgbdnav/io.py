"""File formats: binary PGM images, grid snapshots and CSV exports."""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .camera import LaserScan, PointCloud
from .costmap import UNKNOWN, GridSpec, OccupancyGrid
from .geometry import Pose2D

PathLike = str | os.PathLike

UNKNOWN_GRAY = 128


class PGMError(ValueError):
    """Malformed PGM data; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _header_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PGMError("unexpected end of header", start)
    return data[start:pos], start, pos


def decode_pgm(data: bytes) -> NDArray[np.integer]:
    """Decode a binary (P5) PGM; 16-bit samples are big-endian."""
    if data[:2] != b"P5":
        raise PGMError("not a binary PGM (expected magic 'P5')", 0)
    pos = 2
    values = []
    for field in ("width", "height", "maxval"):
        tok, start, pos = _header_token(data, pos)
        if not tok.isdigit() or int(tok) <= 0:
            raise PGMError(f"invalid {field} {tok!r}", start)
        values.append(int(tok))
    width, height, maxval = values
    if maxval > 65535:
        raise PGMError(f"maxval {maxval} exceeds 65535", start)
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PGMError("missing whitespace after header", pos)
    pos += 1
    depth = 1 if maxval < 256 else 2
    need = width * height * depth
    if len(data) - pos < need:
        raise PGMError(f"pixel data truncated: need {need} bytes, found {len(data) - pos}", len(data))
    dtype = np.uint8 if depth == 1 else np.dtype(">u2")
    img = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos).reshape(height, width)
    if np.any(img > maxval):
        bad = int(np.argmax(img.reshape(-1) > maxval))
        raise PGMError(f"sample exceeds maxval {maxval}", pos + bad * depth)
    return img.astype(np.uint16 if depth == 2 else np.uint8)


def encode_pgm(img: ArrayLike, maxval: int | None = None) -> bytes:
    a = np.asarray(img)
    if a.ndim != 2:
        raise ValueError("PGM images are two-dimensional")
    if maxval is None:
        maxval = 255 if a.dtype == np.uint8 else 65535
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n{maxval}\n".encode("ascii")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    return header + a.astype(dtype).tobytes()


def read_pgm(path: PathLike) -> NDArray[np.integer]:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path: PathLike, img: ArrayLike, maxval: int | None = None) -> None:
    Path(path).write_bytes(encode_pgm(img, maxval))


def depth_to_millimeters(depth: ArrayLike) -> NDArray[np.uint16]:
    d = np.asarray(depth, dtype=float)
    mm = np.zeros(d.shape, dtype=np.uint16)
    ok = np.isfinite(d) & (d > 0)
    mm[ok] = np.clip(np.floor(d[ok] * 1000.0 + 0.5), 1, 65535).astype(np.uint16)
    return mm


def read_depth_pgm(path: PathLike) -> NDArray[np.float64]:
    """Depth image in meters from a 16-bit millimeter PGM (0 -> NaN)."""
    raw = read_pgm(path).astype(float)
    raw[raw == 0] = np.nan
    return raw / 1000.0


def write_depth_pgm(path: PathLike, depth: ArrayLike) -> None:
    write_pgm(path, depth_to_millimeters(depth), 65535)


def cost_to_gray(cost: ArrayLike) -> NDArray[np.uint8]:
    """0 -> 255 (white), 100 -> 0 (black), UNKNOWN -> 128."""
    c = np.asarray(cost).astype(np.int64)
    gray = (100 - np.clip(c, 0, 100)) * 255 // 100
    return np.where(c == UNKNOWN, UNKNOWN_GRAY, gray).astype(np.uint8)


def gray_to_cost(gray: ArrayLike) -> NDArray[np.uint8]:
    """Exact inverse of :func:`cost_to_gray` on its image."""
    g = np.asarray(gray).astype(np.int64)
    cost = 100 - (-(-g * 100 // 255))
    return np.where(g == UNKNOWN_GRAY, UNKNOWN, cost).astype(np.uint8)


def write_grid(path: PathLike, grid: OccupancyGrid) -> Path:
    """Write ``<path>`` as an 8-bit PGM plus a ``.yaml`` sidecar; returns the sidecar path.

    Rows are flipped so the image's top row is the grid's highest y.
    """
    p = Path(path)
    write_pgm(p, cost_to_gray(grid.cost)[::-1])
    s = grid.spec
    sidecar = p.with_suffix(".yaml")
    sidecar.write_text(
        f"image: {p.name}\n"
        f"width: {s.width}\n"
        f"height: {s.height}\n"
        f"resolution: {s.resolution!r}\n"
        f"origin: [{s.origin.x!r}, {s.origin.y!r}, {s.origin.yaw!r}]\n"
    )
    return sidecar


def read_grid(path: PathLike) -> OccupancyGrid:
    p = Path(path)
    meta = {}
    for line in p.with_suffix(".yaml").read_text().splitlines():
        if ":" in line:
            k, v = line.split(":", 1)
            meta[k.strip()] = v.strip()
    ox, oy, oyaw = (float(x) for x in meta["origin"].strip("[]").split(","))
    spec = GridSpec(int(meta["width"]), int(meta["height"]), float(meta["resolution"]), Pose2D(ox, oy, oyaw))
    return OccupancyGrid(spec, gray_to_cost(read_pgm(p)[::-1]))


def _fmt(x: float) -> str:
    return repr(float(x))


def scan_csv(scan: LaserScan) -> str:
    rows = ["angle_rad,range_m"]
    rows += [f"{_fmt(a)},{_fmt(r)}" for a, r in zip(scan.angles, scan.ranges)]
    return "\n".join(rows) + "\n"


def cloud_csv(cloud: PointCloud) -> str:
    rows = ["x_m,y_m,z_m"]
    rows += [f"{_fmt(x)},{_fmt(y)},{_fmt(z)}" for x, y, z in cloud.points]
    return "\n".join(rows) + "\n"


def path_csv(waypoints: ArrayLike) -> str:
    rows = ["x_m,y_m"] + [f"{_fmt(x)},{_fmt(y)}" for x, y in np.asarray(waypoints).reshape(-1, 2)]
    return "\n".join(rows) + "\n"


def trajectory_csv(trajectory: ArrayLike) -> str:
    rows = ["t_s,x_m,y_m,yaw_rad"]
    rows += [",".join(_fmt(v) for v in row) for row in np.asarray(trajectory).reshape(-1, 4)]
    return "\n".join(rows) + "\n"


def read_scan_csv(path: PathLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "angle_rad,range_m":
        raise ValueError("missing angle_rad,range_m header")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:] if line], dtype=float)
    data = data.reshape(-1, 2)
    return data[:, 0], data[:, 1]


def rows_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(out) + "\n"


def finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None
