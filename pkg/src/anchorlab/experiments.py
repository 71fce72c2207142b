"""Monte Carlo localization benchmarks.

* :func:`run_traversal` walks a trajectory ``repetitions`` times, measuring
  fresh noisy ranges at every point, and reports per-method error stats.
* :func:`noise_sweep` repeats that over noise levels, noise kinds and
  anchor placements.
* :func:`rgap_study` draws random anchor placements, scores each one over
  the trajectory and benchmarks the localizers on it.

Every random draw comes from a substream keyed by the experiment seed and
the task's indices, so results do not depend on execution order.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from .gdop import trajectory_score
from .geometry import AnchorSet, Region, Trajectory
from .localizers import METHODS, GdmConfig, solve_batch
from .noise import NoiseModel, perturb

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSpec:
    anchors: AnchorSet
    trajectory: Trajectory
    noise: NoiseModel
    repetitions: int = 10
    methods: tuple = METHODS
    gdm: GdmConfig = GdmConfig()
    # prefix of the RNG substream; repetition k draws from stream + (k,)
    stream: tuple = ()

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}")


@dataclass(frozen=True)
class ErrorStats:
    method: str
    ave: float
    std: float
    time: float  # mean wall seconds per traversal
    count: int
    failures: int = 0


@dataclass
class TraversalResult:
    stats: dict
    restored: dict = field(default_factory=dict)

    def __getitem__(self, method) -> ErrorStats:
        return self.stats[method]


def run_traversal(spec: ExperimentSpec, keep_restored: bool = False) -> TraversalResult:
    """Benchmark the requested localizers along ``spec.trajectory``.

    Each repetition redraws the noise at every point. GDM and TPLM time
    includes the LSM stage they start from. GDM points that diverge are left
    out of ave/std and counted in ``failures``. With ``keep_restored`` the
    estimates from the last repetition are returned per method.
    """
    truth = spec.trajectory.points
    true_d = spec.anchors.distances_from(truth)
    if np.any(true_d == 0):
        raise ValueError("trajectory passes exactly through an anchor")

    errors = {m: [] for m in spec.methods}
    elapsed = {m: 0.0 for m in spec.methods}
    failures = {m: 0 for m in spec.methods}
    restored = {}
    for rep in range(spec.repetitions):
        rng = spec.noise.generator(*spec.stream, rep)
        measured = perturb(true_d, spec.noise, rng)
        for method in spec.methods:
            start = time.perf_counter()
            est, failed = solve_batch(spec.anchors, measured, method, spec.gdm)
            elapsed[method] += time.perf_counter() - start
            err = np.hypot(est[:, 0] - truth[:, 0], est[:, 1] - truth[:, 1])
            errors[method].append(err[~failed])
            failures[method] += int(failed.sum())
            if keep_restored and rep == spec.repetitions - 1:
                restored[method] = est

    stats = {}
    for method in spec.methods:
        err = np.concatenate(errors[method])
        if failures[method]:
            log.info("%s: %d diverged points excluded", method, failures[method])
        stats[method] = ErrorStats(
            method,
            float(err.mean()) if err.size else float("nan"),
            float(err.std()) if err.size else float("nan"),
            elapsed[method] / spec.repetitions,
            int(err.size),
            failures[method],
        )
    return TraversalResult(stats, restored)


@dataclass(frozen=True)
class SweepRow:
    ap: str
    model: str
    level: float
    stats: ErrorStats


def noise_sweep(template: ExperimentSpec, levels: Sequence[float],
                models: Iterable[str] = ("gaussian", "uniform"),
                placements: Optional[Mapping[str, AnchorSet]] = None) -> list[SweepRow]:
    """Run :func:`run_traversal` for every placement, noise kind and level.

    ``placements`` maps a label to an anchor set and defaults to the
    template's anchors under the label ``"ap"``. The template's noise seed is
    reused for every cell; cells differ through their substream.
    """
    if not levels:
        raise ValueError("levels must be non-empty")
    placements = placements or {"ap": template.anchors}
    rows = []
    for a, (label, anchors) in enumerate(placements.items()):
        for b, model in enumerate(models):
            for c, level in enumerate(levels):
                noise = NoiseModel(model, float(level), template.noise.seed)
                spec = replace(template, anchors=anchors, noise=noise,
                               stream=template.stream + (a, b, c))
                result = run_traversal(spec)
                rows.extend(SweepRow(label, model, float(level), result[m])
                            for m in spec.methods)
    return rows


@dataclass(frozen=True)
class RgapSpec:
    """Random anchor placement study settings.

    ``half_area`` confines anchors to the upper half of ``region``.
    """

    m: int
    placements: int = 100
    half_area: bool = False
    level: float = 0.3
    kind: str = "gaussian"
    seed: int = 0
    repetitions: int = 1
    region: Region = Region.square()
    methods: tuple = METHODS
    gdm: GdmConfig = GdmConfig()

    def __post_init__(self):
        if self.m < 3:
            raise ValueError("random placements need m >= 3")
        if self.placements < 1:
            raise ValueError("placements must be >= 1")

    @property
    def placement_region(self) -> Region:
        r = self.region
        if not self.half_area:
            return r
        return Region(r.xmin, r.ymin + 0.5 * r.height, r.xmax, r.ymax)


@dataclass(frozen=True)
class PlacementResult:
    index: int
    anchors: AnchorSet
    score: float
    stats: dict


@dataclass
class RgapResult:
    spec: RgapSpec
    placements: list
    redraws: int

    @property
    def scores(self) -> np.ndarray:
        return np.array([p.score for p in self.placements])

    def mean_score(self) -> float:
        return float(self.scores.mean())

    def errors(self, method: str) -> np.ndarray:
        return np.array([p.stats[method].ave for p in self.placements])

    def mean_error(self, method: str) -> float:
        return float(self.errors(method).mean())

    def correlation(self, method: str) -> float:
        """Spearman rank correlation between placement score and mean error."""
        return float(sps.spearmanr(self.scores, self.errors(method))[0])

    def histogram(self, bins: int = 20):
        """Score counts over ``bins`` equal-width bins spanning the observed range."""
        return np.histogram(self.scores, bins=bins)

    def skewness(self) -> float:
        return float(sps.skew(self.scores))


def draw_placement(rng: np.random.Generator, m: int, region: Region) -> np.ndarray:
    lo = np.array([region.xmin, region.ymin])
    hi = np.array([region.xmax, region.ymax])
    return rng.uniform(lo, hi, size=(m, 2))


def rgap_study(spec: RgapSpec, trajectory: Trajectory) -> RgapResult:
    """Score and benchmark ``spec.placements`` random anchor placements.

    Placement ``k`` is drawn from substream ``(0, k, attempt)`` and its ranging
    noise from ``(1, k, rep)``. Collinear draws are redrawn and counted.
    """
    noise = NoiseModel(spec.kind, spec.level, spec.seed)
    area = spec.placement_region
    results = []
    redraws = 0
    for k in range(spec.placements):
        attempt = 0
        while True:
            pts = draw_placement(noise.generator(0, k, attempt), spec.m, area)
            try:
                anchors = AnchorSet.from_points(pts)
            except ValueError:
                anchors = None
            if anchors is not None and not anchors.is_collinear():
                break
            attempt += 1
            redraws += 1
        score = trajectory_score(anchors, trajectory).value
        ex = ExperimentSpec(anchors, trajectory, noise, spec.repetitions,
                            spec.methods, spec.gdm, stream=(1, k))
        results.append(PlacementResult(k, anchors, score, run_traversal(ex).stats))
    return RgapResult(spec, results, redraws)
