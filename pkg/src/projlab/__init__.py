"""Nonconvex alternating projections with diagnostics and applications.

Modules: core (points, projection results, tie policies), sets (catalog of
projectable sets), engine (iteration drivers), diagnostics (gap, angles,
rates, reach), phase (Fourier phase retrieval and the two-pixel lifts),
apps (Gaussian EM and Cadzow), cli (the ``projlab`` command).
"""

from .core import ProjectionResult, TiePolicy, Tolerances, distance, select, svd_small
from .engine import Trace, run_alternating, run_averaged, run_douglas_rachford, run_local_alternating

__version__ = "0.1.0"

__all__ = [
    "ProjectionResult", "TiePolicy", "Tolerances", "Trace", "distance", "run_alternating",
    "run_averaged", "run_douglas_rachford", "run_local_alternating", "select", "svd_small",
]
