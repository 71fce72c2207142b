"""Seeded ranging-noise models and the noisy range simulator.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=stream)``. A stream is a tuple of
non-negative integers (for example ``(repetition,)``), so every experiment
repetition or worker draws from its own independent substream and the same
``(seed, stream)`` reproduces the same numbers on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import AnchorSet, Point2D

GENERATOR = "PCG64"
KINDS = ("gaussian", "uniform")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean additive ranging noise.

    ``level`` is the standard deviation in meters for both kinds. A uniform
    model of level ``L`` draws from ``U(-a, a)`` with ``a = L * sqrt(3)``,
    which has the same standard deviation as ``N(0, L**2)``.
    """

    kind: str = "gaussian"
    level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if not (self.level >= 0 and math.isfinite(self.level)):
            raise ValueError(f"noise level must be finite and >= 0, got {self.level}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def half_width(self) -> float:
        """Half-width ``a`` of the uniform distribution."""
        return self.level * math.sqrt(3.0)

    @property
    def variance(self) -> float:
        return self.level ** 2

    def generator(self, *stream: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(s) for s in stream))
        return np.random.Generator(np.random.PCG64(ss))

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.level == 0:
            return np.zeros(shape)
        if self.kind == "gaussian":
            return rng.normal(0.0, self.level, shape)
        a = self.half_width
        return rng.uniform(-a, a, shape)


def draw_noise(model: NoiseModel, count: int, stream: tuple = ()) -> np.ndarray:
    """``count`` i.i.d. offsets from ``model`` on substream ``stream``."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return model.sample(model.generator(*stream), count)


def perturb(distances: np.ndarray, model: NoiseModel,
            rng: np.random.Generator) -> np.ndarray:
    """Add one fresh offset per entry and clamp at zero."""
    distances = np.asarray(distances, dtype=float)
    return np.maximum(0.0, distances + model.sample(rng, distances.shape))


@dataclass(frozen=True, eq=False)
class RangeSample:
    """One epoch of measured ranges to the ``m`` anchors."""

    epoch: int
    distances: np.ndarray
    true_position: Optional[Point2D] = None

    def __post_init__(self):
        d = np.array(self.distances, dtype=float, copy=True).reshape(-1)
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("measured distances must be finite and >= 0")
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)

    @property
    def m(self) -> int:
        return len(self.distances)

    def __eq__(self, other):
        if not isinstance(other, RangeSample):
            return NotImplemented
        return (self.epoch == other.epoch and self.true_position == other.true_position
                and np.array_equal(self.distances, other.distances))


def measure(anchors: AnchorSet, p: Point2D, model: NoiseModel,
            rng: Optional[np.random.Generator] = None, epoch: int = 0) -> RangeSample:
    """Simulate one epoch of ranging from ``p``.

    Each anchor gets one fresh offset; negative results are clamped to 0.
    Without ``rng`` the model's base stream is used, so repeated calls with
    the same model return the same sample.
    """
    true = anchors.distances_from(p)
    if np.any(true == 0):
        raise ValueError(f"point {tuple(p)} coincides with an anchor")
    gen = rng if rng is not None else model.generator()
    return RangeSample(epoch, perturb(true, model, gen), true_position=p)
