"""Path-following simulation of the three redundancy-resolution strategies."""

from .path import TaskPath, path_pose, path_twist, radial_direction
from .runner import (SimulationSettings, SummaryStats, TrajectorySample, run_simulation,
                     summarize)
from .metrics import product_of_singular_values

__all__ = [
    "TaskPath", "path_pose", "path_twist", "radial_direction",
    "SimulationSettings", "SummaryStats", "TrajectorySample", "run_simulation", "summarize",
    "product_of_singular_values",
]
