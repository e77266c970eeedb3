"""Hyperbolic sphere-packing bounds, volumes and random-packing simulation."""

from .bounds import (BoundsRow, compute_row, main_bound_log, solve_tau,
                     trivial_lower_bound_log)
from .errors import (ConfigError, DimensionError, DomainError, EmptyIntersectionError,
                     HyperpackError, NoRootError, ResourceError)
from .hypgeo import HPoint, TangentVec, distance, geodesic_point, sigma_intersection
from .packing import PackingResult, SimConfig, run_pipeline
from .volumes import LogReal, log_ball_volume, log_volume_ratio

__version__ = "0.1.0"

__all__ = [
    "BoundsRow", "ConfigError", "DimensionError", "DomainError", "EmptyIntersectionError",
    "HPoint", "HyperpackError", "LogReal", "NoRootError", "PackingResult", "ResourceError",
    "SimConfig", "TangentVec", "compute_row", "distance", "geodesic_point", "log_ball_volume",
    "log_volume_ratio", "main_bound_log", "run_pipeline", "sigma_intersection", "solve_tau",
    "trivial_lower_bound_log",
]
