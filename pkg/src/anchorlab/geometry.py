"""Planar primitives: points, anchor sets, regions, trajectories and the
Hilbert traversal curve used as the reference trajectory.

All coordinates are plain meters in a local Cartesian frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

# Default traversal used throughout the benchmarks: an order-6 Hilbert curve
# over a 100 x 100 m square, resampled to 8190 points.
HT_ORDER = 6
HT_POINTS = 8190
HT_SIDE = 100.0


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def __iter__(self):
        yield self.x
        yield self.y


def distance(a: Point2D, b: Point2D) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


def _as_xy(points) -> np.ndarray:
    arr = np.asarray([tuple(p) for p in points] if not isinstance(points, np.ndarray) else points,
                     dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of points, got shape {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Ordered, immutable collection of anchors with stable integer ids.

    ``positions`` is an ``(m, 2)`` array; row ``k`` belongs to ``ids[k]``.
    """

    positions: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        pos = _as_xy(self.positions)
        if len(pos) < 2:
            raise ValueError("an anchor set needs at least 2 anchors")
        if not np.all(np.isfinite(pos)):
            raise ValueError("anchor coordinates must be finite")
        ids = tuple(int(i) for i in self.ids) if self.ids else tuple(range(1, len(pos) + 1))
        if len(ids) != len(pos):
            raise ValueError("ids and positions differ in length")
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate anchor ids: {ids}")
        if len({(x, y) for x, y in pos.tolist()}) != len(pos):
            raise ValueError("anchor positions must be pairwise distinct")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_points(cls, points: Iterable, ids: Optional[Sequence[int]] = None) -> "AnchorSet":
        return cls(_as_xy(list(points)), tuple(ids) if ids is not None else ())

    @property
    def m(self) -> int:
        return len(self.positions)

    def __len__(self):
        return self.m

    def __eq__(self, other):
        if not isinstance(other, AnchorSet):
            return NotImplemented
        return self.ids == other.ids and np.array_equal(self.positions, other.positions)

    def __hash__(self):
        return hash((self.ids, self.positions.tobytes()))

    def point(self, k: int) -> Point2D:
        return Point2D(*self.positions[k])

    def pairs(self) -> list[tuple[int, int]]:
        """Index pairs ``(i, j)``, ``i < j``, in lexicographic order."""
        return [(i, j) for i in range(self.m) for j in range(i + 1, self.m)]

    def pair_ids(self, pair: tuple[int, int]) -> tuple[int, int]:
        return self.ids[pair[0]], self.ids[pair[1]]

    def distances_from(self, points) -> np.ndarray:
        """True distances; ``(m,)`` for a single point, ``(n, m)`` for many."""
        if isinstance(points, Point2D):
            return np.hypot(self.positions[:, 0] - points.x, self.positions[:, 1] - points.y)
        pts = _as_xy(points)
        return np.hypot(pts[:, None, 0] - self.positions[None, :, 0],
                        pts[:, None, 1] - self.positions[None, :, 1])

    def translated(self, dx: float, dy: float) -> "AnchorSet":
        return AnchorSet(self.positions + [dx, dy], self.ids)

    def is_collinear(self, rtol: float = 1e-9) -> bool:
        """True when every anchor lies on one line (rank-deficient spread)."""
        centered = self.positions - self.positions.mean(axis=0)
        s = np.linalg.svd(centered, compute_uv=False)
        return bool(s[1] <= rtol * max(s[0], 1e-300))


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("region bounds must be finite")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"degenerate region {vals}")

    @classmethod
    def square(cls, side: float = HT_SIDE) -> "Region":
        return cls(0.0, 0.0, side, side)

    @classmethod
    def parse(cls, text: str) -> "Region":
        """Parse ``"xmin,ymin,xmax,ymax"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise ValueError(f"region must be xmin,ymin,xmax,ymax; got {text!r}")
        return cls(*(float(p) for p in parts))

    def __str__(self):
        return f"{self.xmin:g},{self.ymin:g},{self.xmax:g},{self.ymax:g}"

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def centroid(self) -> Point2D:
        return Point2D(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def axes(self, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates of an ``nx`` by ``ny`` grid including the boundary."""
        if nx < 2 or ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        return np.linspace(self.xmin, self.xmax, nx), np.linspace(self.ymin, self.ymax, ny)

    def contains(self, points, atol: float = 1e-9) -> np.ndarray:
        pts = _as_xy(points)
        return ((pts[:, 0] >= self.xmin - atol) & (pts[:, 0] <= self.xmax + atol)
                & (pts[:, 1] >= self.ymin - atol) & (pts[:, 1] <= self.ymax + atol))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered point sequence, implicitly joined by straight segments."""

    points: np.ndarray
    _length: float = field(init=False, repr=False)

    def __post_init__(self):
        pts = _as_xy(self.points)
        if len(pts) < 2:
            raise ValueError("a trajectory needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("trajectory coordinates must be finite")
        length = float(np.hypot(*np.diff(pts, axis=0).T).sum())
        if not length > 0:
            raise ValueError("trajectory has zero arc length")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "_length", length)

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    @property
    def length(self) -> float:
        return self._length

    def reversed(self) -> "Trajectory":
        return Trajectory(self.points[::-1])

    def translated(self, dx: float, dy: float) -> "Trajectory":
        return Trajectory(self.points + [dx, dy])


def arc_length(t: Trajectory) -> float:
    """Sum of segment lengths."""
    return t.length


def cumulative_length(points: np.ndarray) -> np.ndarray:
    seg = np.hypot(*np.diff(points, axis=0).T)
    return np.concatenate(([0.0], np.cumsum(seg)))


def resample_by_arc_length(points, n: int) -> np.ndarray:
    """Place ``n`` points at equal arc-length spacing along a polyline.

    Both endpoints are kept exactly. Sample ``k`` sits at arc-length
    parameter ``k * L / (n - 1)`` on the source curve.
    """
    if n < 2:
        raise ValueError("resample_to must be at least 2")
    pts = _as_xy(points)
    cum = cumulative_length(pts)
    total = cum[-1]
    s = np.linspace(0.0, total, n)
    seg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(pts) - 2)
    span = cum[seg + 1] - cum[seg]
    frac = np.divide(s - cum[seg], span, out=np.zeros_like(s), where=span > 0)
    out = pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def hilbert_cells(order: int) -> np.ndarray:
    """Integer cell indices ``(col, row)`` of the order-``order`` Hilbert curve.

    Standard orientation: starts at cell (0, 0), ends at (2**order - 1, 0).
    """
    if order < 1:
        raise ValueError(f"Hilbert order must be positive, got {order}")
    side = 1 << order
    d = np.arange(side * side, dtype=np.int64)
    x = np.zeros_like(d)
    y = np.zeros_like(d)
    t = d.copy()
    s = 1
    while s < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x = x + s * rx
        y = y + s * ry
        t //= 4
        s *= 2
    return np.stack([x, y], axis=1)


def hilbert_vertices(order: int, region: Region) -> np.ndarray:
    """Cell-center vertices scaled into ``region``, starting top-left.

    The standard curve is mirrored vertically so the walk begins in the
    upper-left cell and finishes in the upper-right one.
    """
    cells = hilbert_cells(order).astype(float)
    side = 1 << order
    x = region.xmin + (cells[:, 0] + 0.5) * region.width / side
    y = region.ymax - (cells[:, 1] + 0.5) * region.height / side
    return np.stack([x, y], axis=1)


def hilbert_trajectory(order: int, region: Region,
                       resample_to: Optional[int] = None) -> Trajectory:
    """Hilbert traversal of ``region``.

    Args:
        order: curve order ``k``; the raw curve has ``4**k`` vertices.
        region: rectangle to fill.
        resample_to: if given, resample uniformly by arc length to this many
            points; otherwise return the raw vertices.
    """
    verts = hilbert_vertices(order, region)
    if resample_to is not None:
        verts = resample_by_arc_length(verts, resample_to)
    return Trajectory(verts)


def default_trajectory() -> Trajectory:
    """The 8190-point Hilbert traversal of the 100 x 100 m square."""
    return hilbert_trajectory(HT_ORDER, Region.square(HT_SIDE), HT_POINTS)
