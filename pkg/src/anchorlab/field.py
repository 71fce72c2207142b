"""Field-study support: GPS to local-frame transform and range-log replay."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geometry import AnchorSet, Point2D
from .localizers import METHODS, GdmConfig, solve_batch

# sampling pauses longer than this (seconds) are flagged as gaps
GAP_THRESHOLD = 3.0


@dataclass(frozen=True)
class GeoTransform:
    """Planar approximation mapping longitude/latitude degrees to meters.

    ``local = R(-rotation) @ ((lon - origin_lon) * x_scale,
    (lat - origin_lat) * y_scale)``; the rotation is clockwise by
    ``rotation`` radians.
    """

    origin_lon: float
    origin_lat: float
    x_scale: float
    y_scale: float
    rotation: float

    def __post_init__(self):
        if not (self.x_scale > 0 and self.y_scale > 0):
            raise ValueError("scales must be > 0")

    @classmethod
    def load(cls, path) -> "GeoTransform":
        return cls(**{k: float(v) for k, v in json.loads(Path(path).read_text()).items()})

    def dump(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")


# Outdoor testbed: origin, meters per degree and grid rotation.
TESTBED = GeoTransform(-74.476069, 40.537808, 84719.0, 111045.0, 0.381583)
# Anchor GPS fixes on the testbed and their published local positions.
TESTBED_ANCHORS = (
    ((-74.475585, 40.538468), (65.345179, 52.75145)),
    ((-74.475287, 40.53856), (92.580022, 52.83239)),
    ((-74.475186, 40.538294), (89.52274, 22.232383)),
)


def geo_to_local(t: GeoTransform, lon: float, lat: float) -> Point2D:
    sx = (lon - t.origin_lon) * t.x_scale
    sy = (lat - t.origin_lat) * t.y_scale
    c, s = math.cos(t.rotation), math.sin(t.rotation)
    return Point2D(c * sx + s * sy, -s * sx + c * sy)


def local_to_geo(t: GeoTransform, p: Point2D) -> tuple[float, float]:
    c, s = math.cos(t.rotation), math.sin(t.rotation)
    sx = c * p.x - s * p.y
    sy = s * p.x + c * p.y
    return t.origin_lon + sx / t.x_scale, t.origin_lat + sy / t.y_scale


def testbed_anchors() -> AnchorSet:
    """The three testbed anchors in the local frame (ids 4, 5, 6)."""
    return AnchorSet.from_points([local for _, local in TESTBED_ANCHORS], ids=(4, 5, 6))


@dataclass(frozen=True, eq=False)
class FieldLog:
    """Logged range epochs, optionally timestamped and with ground truth.

    ``gaps[k]`` is True when epoch ``k`` follows its predecessor by more than
    ``gap_threshold`` seconds.
    """

    epochs: np.ndarray
    distances: np.ndarray
    times: Optional[np.ndarray] = None
    truth: Optional[np.ndarray] = None
    gap_threshold: float = GAP_THRESHOLD
    skipped: int = 0

    def __post_init__(self):
        n = len(self.epochs)
        if self.distances.shape[0] != n:
            raise ValueError("distances and epochs differ in length")
        if self.times is not None:
            if len(self.times) != n:
                raise ValueError("times and epochs differ in length")
            if np.any(np.diff(self.times) < 0):
                raise ValueError("timestamps must be non-decreasing")
        if self.truth is not None and self.truth.shape != (n, 2):
            raise ValueError("truth must have shape (n, 2)")

    @property
    def n(self) -> int:
        return len(self.epochs)

    @property
    def m(self) -> int:
        return self.distances.shape[1]

    @property
    def gaps(self) -> np.ndarray:
        flags = np.zeros(self.n, dtype=bool)
        if self.times is not None and self.n > 1:
            flags[1:] = np.diff(self.times) > self.gap_threshold
        return flags


@dataclass
class ReplayResult:
    log: FieldLog
    restored: dict
    failed: dict

    def mean_error(self, method: str) -> float:
        if self.log.truth is None:
            raise ValueError("log carries no ground truth")
        est = self.restored[method]
        err = np.hypot(*(est - self.log.truth).T)
        return float(err[~self.failed[method]].mean())


def replay(log: FieldLog, anchors: AnchorSet, methods: Sequence[str] = METHODS,
           gdm: GdmConfig = GdmConfig()) -> ReplayResult:
    """Localize every logged epoch with each method; no noise is added.

    Gap epochs are solved like any other; the gap flags are carried through
    to the output untouched.
    """
    if log.m != anchors.m:
        raise ValueError(f"log has {log.m} ranges per epoch but {anchors.m} anchors were given")
    restored, failed = {}, {}
    for method in methods:
        est, bad = solve_batch(anchors, log.distances, method, gdm)
        restored[method] = est
        failed[method] = bad
    return ReplayResult(log, restored, failed)


def write_replay_csv(target, result: ReplayResult, method: str):
    """``epoch,time,x,y,failed,gap`` for one method."""
    from .formats import fmt

    log = result.log
    est = result.restored[method]
    lines = ["epoch,time,x,y,failed,gap"]
    gaps = log.gaps
    for k in range(log.n):
        t = fmt(log.times[k]) if log.times is not None else ""
        lines.append(f"{log.epochs[k]},{t},{fmt(est[k, 0])},{fmt(est[k, 1])},"
                     f"{int(result.failed[method][k])},{int(gaps[k])}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)
