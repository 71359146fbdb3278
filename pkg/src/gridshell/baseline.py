"""
Reference calculations to compare GA results against: best of a batch of
random genomes, and a sweep over the angle between two straight guidelines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .evolve import (
    GAConfig,
    Individual,
    _stream,
    default_seed_box,
    evaluate_batch,
    random_genome,
)
from .genome import Genome
from .surface import SurfaceSpec

__all__ = ["BaselineResult", "random_lots", "angle_sweep", "lots_genomes", "sweep_genome", "DEFAULT_SWEEP_DEG"]

_LOTS_KEY = 0x6C6F7473
DEFAULT_SWEEP_DEG = tuple(range(10, 175, 5))
TIE_RTOL = 1e-9


@dataclass
class BaselineResult:
    method: str
    best: Individual
    all_values: list
    best_parameter: float | None = None


def _pick(method, params, genomes, fits):
    fits = np.asarray(fits, dtype=float)
    values = [(p, float(f)) for p, f in zip(params, fits)]
    if np.all(~np.isfinite(fits)):
        i = 0
    else:
        # values equal up to round-off (mirror-image nets) count as ties
        lo = fits.min()
        i = int(np.flatnonzero(fits <= lo + TIE_RTOL * abs(lo))[0])
    return BaselineResult(method, Individual(genomes[i], float(fits[i])), values, params[i])


def lots_genomes(spec: SurfaceSpec, config: GAConfig, n_draws: int, start: int = 0):
    """Random genomes ``start .. n_draws-1``; draw ``k`` has its own stream so prefixes agree."""
    box = config.seed_box if config.seed_box is not None else default_seed_box(spec)
    return [random_genome(config, _stream(config.seed, _LOTS_KEY, k), box) for k in range(start, n_draws)]


def random_lots(spec: SurfaceSpec, w: float, config: GAConfig, n_draws: int = 10000) -> BaselineResult:
    """Evaluate ``n_draws`` random genomes and keep the best.

    When every draw is invalid the reported best carries the +inf sentinel.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    genomes = lots_genomes(spec, config, n_draws)
    fits = evaluate_batch(spec, genomes, w, config)
    return _pick(f"lots({n_draws})", list(range(n_draws)), genomes, fits)


def sweep_genome(phi: float, fixed_a=(0.0, 0.0), alpha1: float = 0.0, n_turns=(11, 11, 11, 11)) -> Genome:
    return Genome.straight(fixed_a[0], fixed_a[1], alpha1, alpha1 + phi, n_turns)


def angle_sweep(spec: SurfaceSpec, w: float, relative_angles=None, fixed_a=(0.0, 0.0),
                alpha1: float = 0.0, config: GAConfig | None = None) -> BaselineResult:
    """Straight guidelines through ``fixed_a`` at ``alpha1`` and ``alpha1 + phi`` for each phi.

    ``relative_angles`` are in radians; the default grid runs from 10 to 170
    degrees in 5 degree steps.  Values within a relative 1e-9 of the minimum
    are ties and go to the first angle in the list.
    """
    if relative_angles is None:
        relative_angles = [math.radians(d) for d in DEFAULT_SWEEP_DEG]
    relative_angles = [float(a) for a in relative_angles]
    if not relative_angles:
        raise ValueError("relative_angles must not be empty")
    config = config or GAConfig()
    genomes = [sweep_genome(phi, fixed_a, alpha1, tuple(config.n_turns)) for phi in relative_angles]
    fits = evaluate_batch(spec, genomes, w, replace(config, threads=1))
    return _pick("sweep", relative_angles, genomes, fits)

