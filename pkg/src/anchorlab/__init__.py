"""Anchor placement quantification and range-based localization toolkit."""

from .gdop import (
    LvtGrid,
    OsapMap,
    PairGdop,
    PlacementScore,
    lvt_grid,
    multi_gdop,
    osap_map,
    pair_gdop,
    pair_gdop_matrix,
    region_score,
    trajectory_score,
)
from .geometry import (
    AnchorSet,
    Point2D,
    Region,
    Trajectory,
    arc_length,
    default_trajectory,
    distance,
    hilbert_trajectory,
)
from .localizers import Estimate, GdmConfig, LsmConfig, gdm_solve, lsm_solve, tplm_solve
from .noise import NoiseModel, RangeSample, draw_noise, measure

__version__ = "0.1.0"

__all__ = [
    "AnchorSet", "Estimate", "GdmConfig", "LsmConfig", "LvtGrid", "NoiseModel", "OsapMap",
    "PairGdop", "PlacementScore", "Point2D", "RangeSample", "Region", "Trajectory",
    "arc_length", "default_trajectory", "distance", "draw_noise", "gdm_solve",
    "hilbert_trajectory", "lsm_solve", "lvt_grid", "measure", "multi_gdop", "osap_map",
    "pair_gdop", "pair_gdop_matrix", "region_score", "tplm_solve", "trajectory_score",
]
