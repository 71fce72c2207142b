"""Geometric dilution of precision (GDOP) for anchor placements.

The pair GDOP of anchors ``p_i, p_j`` seen from a point ``p`` depends only on
the angle between the two bearings:

    g2 = sqrt(2 / sin^2(beta - alpha))

with ``sin^2`` recovered from the three side lengths of the triangle
``(p, p_i, p_j)`` by the law of cosines. The multi-anchor GDOP is the minimum
over all pairs, and the minimizing pair is the optimally selected anchor pair
(OSAP). Averaging the multi-anchor GDOP over a region or along a trajectory
gives a single placement score; lower is better and the floor is sqrt(2).

Infinite GDOP (collinear bearings) is represented by ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import AnchorSet, Point2D, Region, Trajectory, distance

SQRT2 = math.sqrt(2.0)

# 1 - cos^2 at or below this is treated as collinear
COLLINEAR_EPS = 1e-12

INF = math.inf


class SingularityError(ValueError):
    """The evaluation point coincides with an anchor."""


class DegeneratePlacementError(ValueError):
    """Every anchor pair is collinear with the evaluation point(s)."""


@dataclass(frozen=True)
class PairGdop:
    value: float
    pair: tuple
    degenerate: bool = False

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


@dataclass(frozen=True)
class PlacementScore:
    value: float
    domain: str  # "region" | "trajectory"
    skipped: int = 0

    def __float__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class LvtGrid:
    """Multi-anchor GDOP sampled on grid nodes; ``values[ix, iy]``."""

    region: Region
    nx: int
    ny: int
    values: np.ndarray

    @property
    def xs(self) -> np.ndarray:
        return self.region.axes(self.nx, self.ny)[0]

    @property
    def ys(self) -> np.ndarray:
        return self.region.axes(self.nx, self.ny)[1]

    def finite_range(self) -> tuple[float, float]:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.min()), float(finite.max())


@dataclass(frozen=True, eq=False)
class OsapMap:
    """Winning anchor pair per grid node.

    ``labels[ix, iy]`` indexes ``pairs``, which holds anchor-id pairs in
    lexicographic index order; ``-1`` marks nodes where no pair is finite.
    """

    region: Region
    nx: int
    ny: int
    labels: np.ndarray
    pairs: tuple

    def pair_counts(self) -> dict:
        uniq, counts = np.unique(self.labels, return_counts=True)
        return {int(u): int(c) for u, c in zip(uniq, counts)}


def pair_gdop_field(d_i, d_j, d_ij) -> np.ndarray:
    """Vectorized pair GDOP from the two ranges and the baseline length.

    Zero ranges and collinear geometry both come back as ``inf``.
    """
    d_i = np.asarray(d_i, dtype=float)
    d_j = np.asarray(d_j, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = (d_i * d_i + d_j * d_j - d_ij * d_ij) / (2.0 * d_i * d_j)
        sin2 = 1.0 - cos * cos
        g = np.sqrt(2.0 / sin2)
    return np.where(sin2 > COLLINEAR_EPS, g, np.inf)


def pair_gdop(p_i: Point2D, p_j: Point2D, d_i: float, d_j: float,
              pair: tuple = (0, 1)) -> PairGdop:
    """Pair GDOP from ranges ``d_i``, ``d_j`` to anchors ``p_i``, ``p_j``.

    The ranges may be true or measured; only the triangle's side lengths
    enter. Raises :class:`SingularityError` for a zero range.
    """
    if d_i <= 0 or d_j <= 0:
        raise SingularityError("zero range: the point coincides with an anchor")
    d_ij = distance(p_i, p_j)
    if d_ij == 0:
        raise ValueError("anchor pair positions coincide")
    value = float(pair_gdop_field(d_i, d_j, d_ij))
    return PairGdop(value, tuple(pair), degenerate=not math.isfinite(value))


def pair_gdop_matrix(p: Point2D, p_i: Point2D, p_j: Point2D,
                     pair: tuple = (0, 1)) -> PairGdop:
    """Pair GDOP as ``sqrt(trace((H^T H)^-1))`` with ``H`` the unit bearings.

    Independent of the law-of-cosines form; used to cross-check it.
    """
    rows = []
    for a in (p_i, p_j):
        dx, dy = p.x - a.x, p.y - a.y
        r = math.hypot(dx, dy)
        if r == 0:
            raise SingularityError("point coincides with an anchor")
        rows.append((dx / r, dy / r))
    h = np.array(rows)
    hth = h.T @ h
    if abs(np.linalg.det(hth)) <= COLLINEAR_EPS:
        return PairGdop(INF, tuple(pair), degenerate=True)
    value = math.sqrt(float(np.trace(np.linalg.inv(hth))))
    return PairGdop(value, tuple(pair))


def _baselines(anchors: AnchorSet) -> list[tuple[int, int, float]]:
    pos = anchors.positions
    return [(i, j, math.hypot(*(pos[i] - pos[j]))) for i, j in anchors.pairs()]


def multi_gdop_field(anchors: AnchorSet, distances: np.ndarray):
    """Minimum pair GDOP for each row of an ``(n, m)`` range matrix.

    Returns ``(values, winner)`` where ``winner`` indexes
    ``anchors.pairs()`` (``-1`` where every pair is infinite). Ties go to
    the lexicographically smallest pair.
    """
    dist = np.atleast_2d(np.asarray(distances, dtype=float))
    n = dist.shape[0]
    best = np.full(n, np.inf)
    winner = np.full(n, -1, dtype=np.int64)
    for k, (i, j, d_ij) in enumerate(_baselines(anchors)):
        g = pair_gdop_field(dist[:, i], dist[:, j], d_ij)
        better = g < best
        best[better] = g[better]
        winner[better] = k
    return best, winner


def multi_gdop(anchors: AnchorSet, p: Point2D,
               distances: Optional[np.ndarray] = None) -> PairGdop:
    """Multi-anchor GDOP at ``p`` and the optimally selected pair.

    ``distances`` defaults to the true ranges from ``p``. The result's
    ``pair`` holds anchor ids; a fully collinear configuration returns
    ``inf`` with ``degenerate=True``.
    """
    d = anchors.distances_from(p) if distances is None else np.asarray(distances, float)
    if d.shape != (anchors.m,):
        raise ValueError(f"expected {anchors.m} distances, got {d.shape}")
    if np.any(d <= 0):
        raise SingularityError("zero range: the point coincides with an anchor")
    values, winner = multi_gdop_field(anchors, d[None, :])
    k = int(winner[0])
    if k < 0:
        return PairGdop(INF, anchors.pair_ids(anchors.pairs()[0]), degenerate=True)
    return PairGdop(float(values[0]), anchors.pair_ids(anchors.pairs()[k]))


def gdop_at_points(anchors: AnchorSet, points) -> np.ndarray:
    """Noise-free multi-anchor GDOP at many points; ``inf`` on anchors."""
    dist = anchors.distances_from(points)
    values, _ = multi_gdop_field(anchors, dist)
    values[np.any(dist == 0, axis=1)] = np.inf
    return values


def lvt_grid(anchors: AnchorSet, region: Region, nx: int, ny: int) -> LvtGrid:
    """Least-vulnerability tomography: GDOP raster over ``region``."""
    xs, ys = region.axes(nx, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    values = gdop_at_points(anchors, np.stack([gx.ravel(), gy.ravel()], axis=1))
    return LvtGrid(region, nx, ny, values.reshape(nx, ny))


def _require_nondegenerate(anchors: AnchorSet):
    # two anchors always share a line; only m >= 3 can be degenerate
    if anchors.m >= 3 and anchors.is_collinear():
        raise DegeneratePlacementError(
            "all anchors are collinear: degenerate placement, GDOP is infinite "
            "along the anchor line and the LSM system is singular")


def _offset_toward(p: np.ndarray, target: Point2D, step: float) -> np.ndarray:
    direction = np.array([target.x, target.y]) - p
    norm = math.hypot(*direction)
    if norm == 0:
        direction, norm = np.array([1.0, 0.0]), 1.0
    return p + step * direction / norm


def region_score(anchors: AnchorSet, region: Region,
                 subdivisions: int = 100) -> PlacementScore:
    """Average multi-anchor GDOP over ``region`` by the 2-D trapezium rule.

    The region is split into ``subdivisions**2`` equal cells, i.e.
    ``(subdivisions + 1)**2`` nodes. Nodes where the GDOP is singular (on an
    anchor, or collinear with every pair) are evaluated half a grid spacing
    closer to the region centroid instead.
    """
    _require_nondegenerate(anchors)
    n = subdivisions + 1
    xs, ys = region.axes(n, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
    values = gdop_at_points(anchors, nodes)

    step = 0.5 * min(xs[1] - xs[0], ys[1] - ys[0])
    for k in np.flatnonzero(~np.isfinite(values)):
        moved = _offset_toward(nodes[k], region.centroid, step)
        values[k] = gdop_at_points(anchors, moved[None, :])[0]
        if not math.isfinite(values[k]):
            raise DegeneratePlacementError(
                f"GDOP stays singular near node {tuple(nodes[k])}")

    w = np.ones(n)
    w[0] = w[-1] = 0.5
    weights = np.outer(w, w).ravel()
    total = math.fsum(weights * values)
    return PlacementScore(total / (subdivisions * subdivisions), "region")


def trajectory_score(anchors: AnchorSet, t: Trajectory) -> PlacementScore:
    """Mean multi-anchor GDOP over the trajectory's sample points.

    Samples sitting exactly on an anchor are skipped and counted in
    ``skipped``.
    """
    _require_nondegenerate(anchors)
    values = gdop_at_points(anchors, t.points)
    finite = np.isfinite(values)
    if not finite.any():
        raise DegeneratePlacementError("GDOP is singular at every trajectory sample")
    kept = values[finite]
    return PlacementScore(math.fsum(kept) / len(kept), "trajectory",
                          skipped=int((~finite).sum()))


def osap_map(anchors: AnchorSet, region: Region, nx: int, ny: int,
             noise=None, rng: Optional[np.random.Generator] = None) -> OsapMap:
    """Optimally selected anchor pair at each grid node.

    With ``noise`` (a :class:`~anchorlab.noise.NoiseModel`) the ranges at
    every node are perturbed once before selection, which is what a localizer
    sees at run time. Nodes on an anchor get label ``-1``.
    """
    xs, ys = region.axes(nx, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
    dist = anchors.distances_from(nodes)
    on_anchor = np.any(dist == 0, axis=1)
    if noise is not None:
        from .noise import perturb

        gen = rng if rng is not None else noise.generator()
        dist = perturb(dist, noise, gen)
    _, winner = multi_gdop_field(anchors, dist)
    winner[on_anchor] = -1
    pairs = tuple(anchors.pair_ids(p) for p in anchors.pairs())
    return OsapMap(region, nx, ny, winner.reshape(nx, ny), pairs)
