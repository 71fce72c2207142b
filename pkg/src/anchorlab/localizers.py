"""Position estimators for range-based localization.

Three solvers, each with a vectorized kernel over an ``(n, m)`` matrix of
measured ranges and a single-epoch wrapper returning :class:`Estimate`:

* LSM: linearized least squares from the range equations differenced
  against the first anchor.
* GDM: fixed-step gradient descent on the squared circle residuals,
  initialized from LSM.
* TPLM: two-phase method. Picks the anchor pair with the lowest GDOP
  computed from the measured ranges, intersects the two range circles in
  closed form and keeps the intersection closer to an LSM reference point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .gdop import multi_gdop_field
from .geometry import AnchorSet, Point2D
from .noise import RangeSample

METHODS = ("lsm", "gdm", "tplm")

OK = "ok"
MAX_ITERS = "max_iters"
DIVERGED = "diverged"
CLAMPED = "clamped"
NO_FINITE_PAIR = "no_finite_pair"


class SingularGeometryError(ValueError):
    """The linearized system is rank deficient (collinear anchors)."""


@dataclass(frozen=True)
class LsmConfig:
    # reciprocal condition number of A^T A below which it counts as singular
    rcond: float = 1e-12

    def __post_init__(self):
        if not self.rcond > 0:
            raise ValueError("rcond must be > 0")


@dataclass(frozen=True)
class GdmConfig:
    """Gradient-descent settings.

    The update is ``p <- p - step * grad_scale * grad f(p)`` where ``f`` is the
    sum of squared circle residuals and ``grad f`` its exact gradient.
    ``grad_scale = 0.5`` (descending along the gradient of ``f / 2``) keeps a
    1e-5 step stable across a 100 m square with anchors at its corners.
    """

    step: float = 1e-5
    tolerance: float = 1e-3
    max_iters: int = 100
    grad_scale: float = 0.5

    def __post_init__(self):
        if not (self.step > 0 and self.tolerance > 0 and self.grad_scale > 0):
            raise ValueError("step, tolerance and grad_scale must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class Estimate:
    position: Point2D
    method: str
    status: str = OK
    iterations: Optional[int] = None
    pair: Optional[tuple] = None
    elapsed: float = 0.0

    @property
    def failed(self) -> bool:
        return self.status == DIVERGED


def _measured(sample: Union[RangeSample, Sequence[float], np.ndarray], m: int) -> np.ndarray:
    d = sample.distances if isinstance(sample, RangeSample) else np.asarray(sample, float)
    if d.shape != (m,):
        raise ValueError(f"expected {m} ranges, got shape {d.shape}")
    return d


# -- LSM ---------------------------------------------------------------------

def lsm_batch(anchors: AnchorSet, measured: np.ndarray,
              cfg: LsmConfig = LsmConfig()) -> np.ndarray:
    """Linearized least-squares positions for each row of ``measured``."""
    if anchors.m < 3:
        raise ValueError("LSM needs at least 3 anchors")
    pos = anchors.positions
    d = np.atleast_2d(np.asarray(measured, dtype=float))
    a = 2.0 * (pos[1:] - pos[0])
    r2 = np.sum(pos * pos, axis=1)
    rhs = d[:, [0]] ** 2 - d[:, 1:] ** 2 + (r2[1:] - r2[0])
    ata = a.T @ a
    if 1.0 / np.linalg.cond(ata) < cfg.rcond:
        raise SingularGeometryError("anchors are collinear; A^T A is singular")
    return np.linalg.solve(ata, a.T @ rhs.T).T


def lsm_solve(anchors: AnchorSet, sample, cfg: LsmConfig = LsmConfig()) -> Estimate:
    start = time.perf_counter()
    d = _measured(sample, anchors.m)
    x, y = lsm_batch(anchors, d[None, :], cfg)[0]
    return Estimate(Point2D(x, y), "lsm", elapsed=time.perf_counter() - start)


# -- GDM ---------------------------------------------------------------------

def objective(anchors: AnchorSet, measured, p) -> np.ndarray:
    """Sum over anchors of ``(|p - p_i|^2 - d_i^2)^2``; broadcasts over points."""
    pts = np.atleast_2d(np.asarray(tuple(p) if isinstance(p, Point2D) else p, float))
    d = np.atleast_2d(np.asarray(measured, float))
    diff = pts[:, None, :] - anchors.positions[None, :, :]
    resid = np.sum(diff * diff, axis=2) - d * d
    return np.sum(resid * resid, axis=1)


def gradient(anchors: AnchorSet, measured, p) -> np.ndarray:
    """Exact gradient of :func:`objective`, shape ``(n, 2)``.

    ``df/dx = sum_i 4 (x - x_i) (|p - p_i|^2 - d_i^2)``, likewise for ``y``.
    """
    pts = np.atleast_2d(np.asarray(tuple(p) if isinstance(p, Point2D) else p, float))
    d = np.atleast_2d(np.asarray(measured, float))
    diff = pts[:, None, :] - anchors.positions[None, :, :]
    resid = np.sum(diff * diff, axis=2) - d * d
    return 4.0 * np.sum(diff * resid[:, :, None], axis=1)


@dataclass
class GdmResult:
    positions: np.ndarray
    iterations: np.ndarray
    status: np.ndarray = field(repr=False)


def gdm_batch(anchors: AnchorSet, measured: np.ndarray, init: np.ndarray,
              cfg: GdmConfig = GdmConfig()) -> GdmResult:
    """Run gradient descent independently from every initial point.

    A point stops once its step is shorter than ``cfg.tolerance`` or after
    ``cfg.max_iters`` steps. A longer step that raises the objective, or any
    step producing a non-finite value, is rejected and the point is marked
    ``diverged``; its position stays at the last accepted iterate.
    """
    d = np.atleast_2d(np.asarray(measured, float))
    pos = np.array(np.atleast_2d(init), dtype=float, copy=True)
    n = len(pos)
    iters = np.zeros(n, dtype=np.int64)
    status = np.full(n, MAX_ITERS, dtype=object)
    fval = objective(anchors, d, pos)
    active = np.flatnonzero(np.isfinite(fval) & np.all(np.isfinite(pos), axis=1))
    status[np.setdiff1d(np.arange(n), active)] = DIVERGED
    scale = cfg.step * cfg.grad_scale

    for _ in range(cfg.max_iters):
        if active.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            delta = scale * gradient(anchors, d[active], pos[active])
            cand = pos[active] - delta
            fnew = objective(anchors, d[active], cand)
        iters[active] += 1
        finite = np.isfinite(fnew) & np.all(np.isfinite(cand), axis=1)
        rises = fnew > fval[active]
        # a sub-tolerance step at the optimum may rise by round-off; that is
        # convergence, and the last accepted iterate is kept
        done = finite & (np.hypot(delta[:, 0], delta[:, 1]) < cfg.tolerance)
        bad = ~finite | (rises & ~done)
        take = finite & ~rises
        status[active[bad]] = DIVERGED
        pos[active[take]] = cand[take]
        fval[active[take]] = fnew[take]
        status[active[done]] = OK
        active = active[~bad & ~done]
    return GdmResult(pos, iters, status)


def gdm_solve(anchors: AnchorSet, sample, init: Point2D,
              cfg: GdmConfig = GdmConfig()) -> Estimate:
    start = time.perf_counter()
    d = _measured(sample, anchors.m)
    res = gdm_batch(anchors, d[None, :], np.array([[init.x, init.y]]), cfg)
    x, y = res.positions[0]
    return Estimate(Point2D(x, y), "gdm", status=res.status[0],
                    iterations=int(res.iterations[0]), elapsed=time.perf_counter() - start)


# -- TPLM --------------------------------------------------------------------

def circle_candidates(p_i, p_j, d_i, d_j):
    """Both intersections of circles ``|q - p_i| = d_i`` and ``|q - p_j| = d_j``.

    Works in a frame rotated so the baseline lies on the x axis: the
    intersections sit at ``(u, +v)`` and ``(u, -v)`` relative to ``p_i``.
    Arrays broadcast. Returns ``(plus, minus, clamped)``, where ``clamped``
    marks disjoint circles whose ``v`` was set to 0.
    """
    p_i = np.asarray(p_i, float)
    p_j = np.asarray(p_j, float)
    d_i = np.asarray(d_i, float)
    d_j = np.asarray(d_j, float)
    base = p_j - p_i
    dij = np.hypot(base[..., 0], base[..., 1])
    theta = np.arctan2(base[..., 1], base[..., 0])
    u = (dij * dij + d_i * d_i - d_j * d_j) / (2.0 * dij)
    radicand = d_i * d_i - u * u
    clamped = radicand < 0
    v = np.sqrt(np.where(clamped, 0.0, radicand))
    c, s = np.cos(theta), np.sin(theta)
    plus = np.stack([c * u - s * v + p_i[..., 0], s * u + c * v + p_i[..., 1]], axis=-1)
    minus = np.stack([c * u + s * v + p_i[..., 0], s * u - c * v + p_i[..., 1]], axis=-1)
    return plus, minus, clamped


@dataclass
class TplmResult:
    positions: np.ndarray
    pair_index: np.ndarray
    clamped: np.ndarray
    no_pair: np.ndarray


def select_pairs(anchors: AnchorSet, measured: np.ndarray):
    """Phase 1: lowest measured-range GDOP pair per row.

    Returns ``(pair_index, no_pair)``. Rows where every pair is infinite fall
    back to the first pair and are flagged.
    """
    d = np.atleast_2d(np.asarray(measured, float))
    if anchors.m == 2:
        return np.zeros(len(d), dtype=np.int64), np.zeros(len(d), dtype=bool)
    _, winner = multi_gdop_field(anchors, d)
    no_pair = winner < 0
    return np.where(no_pair, 0, winner), no_pair


def tplm_batch(anchors: AnchorSet, measured: np.ndarray,
               reference: np.ndarray) -> TplmResult:
    d = np.atleast_2d(np.asarray(measured, float))
    ref = np.atleast_2d(np.asarray(reference, float))
    pair_index, no_pair = select_pairs(anchors, d)
    pairs = np.array(anchors.pairs())
    i, j = pairs[pair_index, 0], pairs[pair_index, 1]
    rows = np.arange(len(d))
    pos = anchors.positions
    plus, minus, clamped = circle_candidates(pos[i], pos[j], d[rows, i], d[rows, j])
    d_plus = np.hypot(*(plus - ref).T)
    d_minus = np.hypot(*(minus - ref).T)
    # a tie keeps the +v candidate
    chosen = np.where((d_plus <= d_minus)[:, None], plus, minus)
    return TplmResult(chosen, pair_index, clamped, no_pair)


def tplm_solve(anchors: AnchorSet, sample, reference: Point2D) -> Estimate:
    start = time.perf_counter()
    d = _measured(sample, anchors.m)
    res = tplm_batch(anchors, d[None, :], np.array([[reference.x, reference.y]]))
    x, y = res.positions[0]
    status = NO_FINITE_PAIR if res.no_pair[0] else CLAMPED if res.clamped[0] else OK
    pair = anchors.pair_ids(anchors.pairs()[int(res.pair_index[0])])
    return Estimate(Point2D(x, y), "tplm", status=status, pair=pair,
                    elapsed=time.perf_counter() - start)


def localize(anchors: AnchorSet, sample, method: str,
             gdm: GdmConfig = GdmConfig()) -> Estimate:
    """Run one method end to end; GDM and TPLM are seeded from LSM."""
    if method == "lsm":
        return lsm_solve(anchors, sample)
    if anchors.m < 3:
        raise ValueError("the LSM reference needs >= 3 anchors; call tplm_solve directly")
    start = time.perf_counter()
    ref = lsm_solve(anchors, sample).position
    if method == "gdm":
        est = gdm_solve(anchors, sample, ref, gdm)
    elif method == "tplm":
        est = tplm_solve(anchors, sample, ref)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return Estimate(est.position, est.method, est.status, est.iterations, est.pair,
                    time.perf_counter() - start)


def solve_batch(anchors: AnchorSet, measured: np.ndarray, method: str,
                gdm: GdmConfig = GdmConfig()):
    """Vectorized counterpart of :func:`localize`.

    Returns ``(positions, failed)`` where ``failed`` flags GDM divergence.
    """
    d = np.atleast_2d(np.asarray(measured, float))
    ok = np.zeros(len(d), dtype=bool)
    if method == "lsm":
        return lsm_batch(anchors, d), ok
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    ref = lsm_batch(anchors, d)
    if method == "gdm":
        res = gdm_batch(anchors, d, ref, gdm)
        return res.positions, res.status == DIVERGED
    return tplm_batch(anchors, d, ref).positions, ok
