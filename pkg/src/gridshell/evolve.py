"""
Steady-state genetic algorithm over net genomes.

A genome is encoded as a flat gene vector::

    [x_a, y_a, alpha1, alpha2*, beta1, beta2*, gamma1..., gamma2..., eps1..., eps2...]

With ``antipodal=True`` (default) ``alpha2*``/``beta2*`` store the deviation
of alpha2/beta2 from the antipode of alpha1/beta1, so the left and bottom
branches stay anchored to whatever alpha1/beta1 a child inherits.

Each generation draws its parents by tournament from the population as it
stood at the start of the generation, breeds ``n_pop`` children and inserts
them pair by pair, each time dropping the two worst individuals.  Because
dropping the two worst after every insertion keeps exactly the ``n_pop``
best of parents plus children, the children of a generation can be
evaluated together, and the best fitness never increases.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .genome import Genome
from .net import map_batch, net_stats, validate_net, TooFewNodesError
from .surface import SurfaceSpec

__all__ = [
    "Genome",
    "GAConfig",
    "Individual",
    "RunReport",
    "InitializationError",
    "SENTINEL",
    "random_genome",
    "fitness_eval",
    "evaluate_batch",
    "tournament_select",
    "uniform_crossover",
    "mutate",
    "evolve_run",
    "default_seed_box",
]

log = logging.getLogger(__name__)

SENTINEL = math.inf
TWO_PI = 2.0 * math.pi


class InitializationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GAConfig:
    n_pop: int = 100
    n_can: int = 3
    p_c: float = 0.5
    p_m: float = 0.01
    eps_conv: float = 1e-3
    patience: int = 5
    max_generations: int = 200
    seed: int = 0
    fitness_kind: str = "max"
    turn_max: float = math.pi / 18
    seed_box: tuple | None = None
    n_turns: tuple = (11, 11, 11, 11)
    antipodal: bool = True
    init_retry_cap: int = 100
    batch_size: int = 256
    threads: int = 1
    coverage_threshold: float = 0.95
    proximity: float = 0.5

    def __post_init__(self):
        if self.n_pop < 4:
            raise ValueError("n_pop must be at least 4")
        if not 1 <= self.n_can <= self.n_pop:
            raise ValueError("n_can must be in [1, n_pop]")
        for name in ("p_c", "p_m"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")
        if not self.eps_conv > 0:
            raise ValueError("eps_conv must be positive")
        if self.patience < 1 or self.max_generations < 1:
            raise ValueError("patience and max_generations must be positive")
        if self.turn_max < 0:
            raise ValueError("turn_max must be non-negative")
        parse_fitness_kind(self.fitness_kind)
        if self.seed_box is not None:
            x0, x1, y0, y1 = self.seed_box
            if x1 < x0 or y1 < y0:
                raise ValueError("seed_box must be (xmin, xmax, ymin, ymax)")

    @property
    def n_genes(self):
        return 6 + sum(self.n_turns)


def parse_fitness_kind(kind: str):
    """``"max"``, ``"mean"`` or ``"top:<p>"`` -> (name, fraction)."""
    if kind in ("max", "mean"):
        return kind, None
    if kind.startswith("top:"):
        p = float(kind[4:])
        if not 0 < p <= 1:
            raise ValueError("top fraction must be in (0, 1]")
        return "top", p
    raise ValueError(f"unknown fitness kind {kind!r}")


def default_seed_box(spec: SurfaceSpec):
    """Seed box used when a config leaves it unset.

    Hemisphere: the square |x|, |y| <= 2 around the apex; hypar: the origin;
    anything else: the whole x, y domain.
    """
    if spec.name == "hemisphere":
        cx, cy = spec.params[0], spec.params[1]
        return (cx - 2.0, cx + 2.0, cy - 2.0, cy + 2.0)
    if spec.name == "hypar":
        return (0.0, 0.0, 0.0, 0.0)
    d = spec.domain
    return (d.xmin, d.xmax, d.ymin, d.ymax)


@dataclass(frozen=True)
class Individual:
    genome: Genome
    fitness: float


@dataclass
class RunReport:
    history: list
    best: Individual
    generations_run: int
    converged: bool
    evaluations: int = 0
    population: list = field(default_factory=list, repr=False)


# ---------------------------------------------------------------------------
# encoding


def gene_bounds(config: GAConfig, seed_box=None):
    """Lower and upper bound of every gene position."""
    box = seed_box if seed_box is not None else config.seed_box
    if box is None:
        raise ValueError("seed box is unset; resolve it with default_seed_box(spec)")
    x0, x1, y0, y1 = box
    tm = config.turn_max
    ang = (-tm, tm) if config.antipodal else (0.0, TWO_PI)
    lo = [x0, y0, 0.0, ang[0], 0.0, ang[0]] + [-tm] * sum(config.n_turns)
    hi = [x1, y1, TWO_PI, ang[1], TWO_PI, ang[1]] + [tm] * sum(config.n_turns)
    return np.array(lo, dtype=float), np.array(hi, dtype=float)


def _wrap_pi(a):
    return (a + math.pi) % TWO_PI - math.pi


def encode(genome: Genome, antipodal: bool = True) -> np.ndarray:
    a2, b2 = genome.alpha2, genome.beta2
    if antipodal:
        a2 = _wrap_pi(genome.alpha2 - genome.alpha1 - math.pi)
        b2 = _wrap_pi(genome.beta2 - genome.beta1 - math.pi)
    head = [genome.x_a, genome.y_a, genome.alpha1, a2, genome.beta1, b2]
    return np.array(head + [v for t in genome.turns for v in t], dtype=float)


def decode(genes, layout, antipodal: bool = True) -> Genome:
    g = [float(v) for v in genes]
    a1, b1 = g[2], g[4]
    a2, b2 = g[3], g[5]
    if antipodal:
        a2 = (a1 + math.pi + a2) % TWO_PI
        b2 = (b1 + math.pi + b2) % TWO_PI
    turns = []
    k = 6
    for n in layout:
        turns.append(tuple(g[k : k + n]))
        k += n
    if k != len(g):
        raise ValueError(f"gene vector of length {len(g)} does not match layout {layout}")
    return Genome(g[0], g[1], a1, a2, b1, b2, *turns)


def _uniform_in(rng, lo, hi):
    span = hi - lo
    return lo + span * rng.random(lo.shape)


# ---------------------------------------------------------------------------
# operators


def random_genome(config: GAConfig, rng: np.random.Generator, seed_box=None) -> Genome:
    """Uniform draw from the gene intervals."""
    lo, hi = gene_bounds(config, seed_box)
    return decode(_uniform_in(rng, lo, hi), config.n_turns, config.antipodal)


def tournament_select(pop, n_can: int, rng: np.random.Generator):
    """Best of ``n_can`` distinct individuals drawn uniformly; ties go to the lowest index."""
    if len(pop) == 0:
        raise ValueError("cannot select from an empty population")
    if not 1 <= n_can <= len(pop):
        raise ValueError("tournament size must be between 1 and the population size")
    idx = np.sort(rng.choice(len(pop), size=n_can, replace=False))
    fit = np.array([pop[i].fitness for i in idx])
    return pop[int(idx[int(np.argmin(fit))])]


def crossover_genes(g1, g2, p_c, rng):
    """Uniform crossover on gene vectors: a gene pair is swapped where ``u > p_c``."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if g1.shape != g2.shape:
        raise ValueError("parents have different gene layouts")
    swap = rng.random(g1.shape) > p_c
    return np.where(swap, g2, g1), np.where(swap, g1, g2)


def mutate_genes(genes, p_m, lo, hi, rng):
    genes = np.asarray(genes, dtype=float)
    hit = rng.random(genes.shape) < p_m
    fresh = _uniform_in(rng, lo, hi)
    return np.where(hit, fresh, genes)


def uniform_crossover(p1: Genome, p2: Genome, p_c: float, rng: np.random.Generator, antipodal: bool = True):
    if p1.layout != p2.layout:
        raise ValueError(f"layout mismatch: {p1.layout} vs {p2.layout}")
    c1, c2 = crossover_genes(encode(p1, antipodal), encode(p2, antipodal), p_c, rng)
    return decode(c1, p1.layout, antipodal), decode(c2, p1.layout, antipodal)


def mutate(genome: Genome, p_m: float, config: GAConfig, rng: np.random.Generator, seed_box=None) -> Genome:
    """Redraw each gene from its interval with probability ``p_m``."""
    if genome.layout != tuple(config.n_turns):
        config = replace(config, n_turns=genome.layout)
    lo, hi = gene_bounds(config, seed_box)
    genes = mutate_genes(encode(genome, config.antipodal), p_m, lo, hi, rng)
    return decode(genes, genome.layout, config.antipodal)


# ---------------------------------------------------------------------------
# fitness


def _score(net, spec, config):
    report = validate_net(net, spec, coverage_threshold=config.coverage_threshold, proximity=config.proximity)
    if not report.valid:
        return SENTINEL
    try:
        stats = net_stats(net)
    except TooFewNodesError:
        return SENTINEL
    kind, p = parse_fitness_kind(config.fitness_kind)
    if kind == "max":
        return stats.c_max
    if kind == "mean":
        return stats.c_mean
    return stats.c_top_mean(p)


def _evaluate_chunk(spec, genomes, w, config):
    nets, lifted = map_batch(spec, genomes, w)
    return [(_score(net, spec, config) if ok else SENTINEL) for net, ok in zip(nets, lifted)]


def evaluate_batch(spec: SurfaceSpec, genomes, w: float, config: GAConfig) -> np.ndarray:
    """Fitness of every genome; chunks may run on ``config.threads`` workers."""
    genomes = list(genomes)
    bs = max(1, config.batch_size)
    chunks = [genomes[k : k + bs] for k in range(0, len(genomes), bs)]
    if config.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(config.threads) as ex:
            parts = list(ex.map(lambda c: _evaluate_chunk(spec, c, w, config), chunks))
    else:
        parts = [_evaluate_chunk(spec, c, w, config) for c in chunks]
    return np.array([f for part in parts for f in part], dtype=float)


def fitness_eval(spec: SurfaceSpec, genome: Genome, w: float, config: GAConfig | None = None) -> float:
    """Maximum (or mean / top-fraction mean) bar curvature of the mapped net; +inf if invalid."""
    return float(evaluate_batch(spec, [genome], w, config or GAConfig())[0])


# ---------------------------------------------------------------------------
# run


def _stream(seed, *key):
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *key])


_INIT_KEY = 0x696E6974


def _converged(f_prev, f_cur, eps):
    if f_cur == 0.0:
        return f_prev == 0.0
    return abs((f_cur - f_prev) / f_cur) < eps


def evolve_run(spec: SurfaceSpec, w: float, config: GAConfig, progress=None) -> RunReport:
    """Run the GA until the best fitness stalls or ``max_generations`` is reached.

    The initial population counts as generation 1.  The run stops once the
    relative change of the best fitness stays below ``eps_conv`` for
    ``patience`` consecutive generations.
    """
    box = config.seed_box if config.seed_box is not None else default_seed_box(spec)
    cfg = replace(config, seed_box=tuple(float(v) for v in box))
    lo, hi = gene_bounds(cfg)
    layout = tuple(cfg.n_turns)

    # initial population: draw in fixed-size rounds, keep valid genomes in draw order
    pop = []
    draws = 0
    cap = cfg.init_retry_cap * cfg.n_pop
    init_rng = _stream(cfg.seed, _INIT_KEY)
    while len(pop) < cfg.n_pop:
        if draws >= cap:
            raise InitializationError(
                f"only {len(pop)} valid genomes among {draws} random draws (need {cfg.n_pop})"
            )
        n = min(cfg.n_pop, cap - draws)
        cand = [decode(_uniform_in(init_rng, lo, hi), layout, cfg.antipodal) for _ in range(n)]
        fits = evaluate_batch(spec, cand, w, cfg)
        draws += n
        for g, f in zip(cand, fits):
            if math.isfinite(f) and len(pop) < cfg.n_pop:
                pop.append(Individual(g, float(f)))
    evaluations = draws
    log.info("initial population ready after %d draws", draws)

    def record():
        fits = np.array([ind.fitness for ind in pop])
        return float(fits.min()), float(fits.mean())

    history = [record()]
    if progress:
        progress(1, *history[-1])
    streak = 0
    converged = False
    n_pairs = (cfg.n_pop + 1) // 2
    gen = 1
    while gen < cfg.max_generations:
        gen += 1
        parents = list(pop)
        children = []
        for k in range(n_pairs):
            rng = _stream(cfg.seed, gen, k)
            p1 = tournament_select(parents, cfg.n_can, rng)
            p2 = tournament_select(parents, cfg.n_can, rng)
            c1, c2 = crossover_genes(encode(p1.genome, cfg.antipodal), encode(p2.genome, cfg.antipodal), cfg.p_c, rng)
            c1 = mutate_genes(c1, cfg.p_m, lo, hi, rng)
            c2 = mutate_genes(c2, cfg.p_m, lo, hi, rng)
            children.append(decode(c1, layout, cfg.antipodal))
            children.append(decode(c2, layout, cfg.antipodal))
        children = children[: cfg.n_pop]
        fits = evaluate_batch(spec, children, w, cfg)
        evaluations += len(children)
        # steady-state insertion: add a pair, drop the two worst (latest entrant loses ties)
        for k in range(0, len(children), 2):
            pop.extend(Individual(g, float(f)) for g, f in zip(children[k : k + 2], fits[k : k + 2]))
            order = sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))
            keep = sorted(order[: cfg.n_pop])
            pop = [pop[i] for i in keep]
        history.append(record())
        if progress:
            progress(gen, *history[-1])
        if _converged(history[-2][0], history[-1][0], cfg.eps_conv):
            streak += 1
        else:
            streak = 0
        if streak >= cfg.patience:
            converged = True
            break

    best_i = min(range(len(pop)), key=lambda i: (pop[i].fitness, i))
    return RunReport(history, pop[best_i], len(history), converged, evaluations, pop)
