"""
Tchebychev nets on implicit surfaces by the compass method, with a genetic
algorithm that picks guidelines to minimise bar curvature.
"""

from .surface import Box, SurfaceSpec, catalog, from_expression
from .genome import Genome
from .net import TchebychevNet, map_surface, net_stats, validate_net
from .evolve import GAConfig, evolve_run, fitness_eval
from .baseline import angle_sweep, random_lots
from .export import export_obj

__all__ = [
    "Box",
    "SurfaceSpec",
    "catalog",
    "from_expression",
    "Genome",
    "TchebychevNet",
    "map_surface",
    "net_stats",
    "validate_net",
    "GAConfig",
    "evolve_run",
    "fitness_eval",
    "angle_sweep",
    "random_lots",
    "export_obj",
]

__version__ = "0.1.0"
