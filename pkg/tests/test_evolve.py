import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from gridshell import surface as S
from gridshell.evolve import (
    SENTINEL,
    GAConfig,
    Individual,
    InitializationError,
    crossover_genes,
    decode,
    default_seed_box,
    encode,
    evolve_run,
    fitness_eval,
    gene_bounds,
    mutate,
    random_genome,
    tournament_select,
    uniform_crossover,
)
from gridshell.genome import Genome

SPHERE = S.hemisphere()
PLANE = S.plane()
DEG = math.pi / 180
HEMI_CFG = GAConfig(seed_box=default_seed_box(SPHERE))


def _in_bounds(genome, cfg):
    lo, hi = gene_bounds(cfg)
    g = encode(genome, cfg.antipodal)
    return bool(np.all(g >= lo - 1e-12) and np.all(g <= hi + 1e-12))


# ---------------------------------------------------------------------------
# configuration and genome


def test_default_gene_count_is_fifty():
    assert GAConfig().n_genes == 50
    g = random_genome(HEMI_CFG, np.random.default_rng(0))
    assert g.n_genes == 50 and g.layout == (11, 11, 11, 11)


@pytest.mark.parametrize(
    "kw",
    [{"n_pop": 3}, {"n_can": 0}, {"n_can": 200}, {"p_c": 1.5}, {"p_m": -0.1}, {"eps_conv": 0}, {"patience": 0},
     {"fitness_kind": "median"}, {"fitness_kind": "top:0"}, {"seed_box": (1, 0, 0, 1)}],
)
def test_config_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        GAConfig(**kw)


def test_genome_dict_round_trip():
    g = random_genome(HEMI_CFG, np.random.default_rng(1))
    assert Genome.from_dict(g.to_dict()) == g
    assert g.digest() == Genome.from_dict(g.to_dict()).digest()


@given(st.integers(0, 2**32 - 1))
def test_encode_decode_round_trip(seed):
    g = random_genome(HEMI_CFG, np.random.default_rng(seed))
    again = decode(encode(g), g.layout)
    np.testing.assert_allclose(encode(again), encode(g), atol=1e-12)
    assert _in_bounds(g, HEMI_CFG)


# ---------------------------------------------------------------------------
# random genomes


def test_random_genome_degenerate_bounds():
    cfg = GAConfig(turn_max=0.0, seed_box=(0.0, 0.0, 0.0, 0.0))
    g = random_genome(cfg, np.random.default_rng(4))
    assert (g.x_a, g.y_a) == (0.0, 0.0)
    assert all(v == 0.0 for t in g.turns for v in t)
    assert g.alpha2 == pytest.approx((g.alpha1 + math.pi) % (2 * math.pi), abs=1e-15)
    assert g.beta2 == pytest.approx((g.beta1 + math.pi) % (2 * math.pi), abs=1e-15)


def test_random_genome_deterministic():
    a = random_genome(HEMI_CFG, np.random.default_rng(99))
    b = random_genome(HEMI_CFG, np.random.default_rng(99))
    assert a == b


def test_random_genome_distributions():
    rng = np.random.default_rng(2024)
    tm = HEMI_CFG.turn_max
    draws = [random_genome(HEMI_CFG, rng) for _ in range(10_000)]
    turns = np.array([g.gamma1[3] for g in draws])
    assert sps.kstest(turns, "uniform", args=(-tm, 2 * tm)).pvalue > 0.01
    eps = np.array([g.eps2[7] for g in draws])
    assert sps.kstest(eps, "uniform", args=(-tm, 2 * tm)).pvalue > 0.01
    alpha1 = np.array([g.alpha1 for g in draws])
    assert sps.kstest(alpha1, "uniform", args=(0, 2 * math.pi)).pvalue > 0.01
    off = np.array([encode(g)[3] for g in draws])
    assert sps.kstest(off, "uniform", args=(-tm, 2 * tm)).pvalue > 0.01
    xa = np.array([g.x_a for g in draws])
    assert sps.kstest(xa, "uniform", args=(-2, 4)).pvalue > 0.01


# ---------------------------------------------------------------------------
# fitness


def test_fitness_plane_straight_is_zero():
    cfg = GAConfig(seed_box=default_seed_box(PLANE))
    assert fitness_eval(PLANE, Genome.straight(1.0, -2.0, 0.3, 1.7), 1.0, cfg) == 0.0


def test_fitness_hemisphere_seventy_degrees():
    f = fitness_eval(SPHERE, Genome.straight(0, 0, 0.0, 70 * DEG), 2.0, HEMI_CFG)
    assert f == pytest.approx(0.178, rel=0.1)


def test_fitness_folded_is_sentinel():
    g = Genome.straight(0, 0, 0.0, 90 * DEG)
    assert fitness_eval(SPHERE, replace(g, alpha2=g.alpha1), 2.0, HEMI_CFG) == SENTINEL == math.inf


def test_fitness_unmappable_is_sentinel():
    assert fitness_eval(SPHERE, Genome.straight(50.0, 0, 0.0, 1.0), 2.0, HEMI_CFG) == SENTINEL


def test_fitness_kinds_are_ordered():
    g = Genome.straight(0, 0, 0.0, 80 * DEG)
    f = {k: fitness_eval(SPHERE, g, 2.0, replace(HEMI_CFG, fitness_kind=k)) for k in ("max", "top:0.1", "mean")}
    assert f["max"] >= f["top:0.1"] >= f["mean"] > 0


def test_fitness_is_pure():
    g = random_genome(HEMI_CFG, np.random.default_rng(17))
    a = fitness_eval(SPHERE, g, 2.0, HEMI_CFG)
    b = fitness_eval(SPHERE, g, 2.0, HEMI_CFG)
    assert a == b or (math.isinf(a) and math.isinf(b))


# ---------------------------------------------------------------------------
# operators


def _pop(values):
    return [Individual(Genome.straight(0, 0, 0, 1), float(v)) for v in values]


def test_tournament_full_size_returns_best():
    pop = _pop([5, 3, 9, 1, 7, 1])
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert tournament_select(pop, len(pop), rng) is pop[3]


def test_tournament_pair():
    pop = _pop([1, 2])
    assert tournament_select(pop, 2, np.random.default_rng(1)).fitness == 1


def test_tournament_size_one_is_uniform():
    pop = _pop(range(10))
    rng = np.random.default_rng(3)
    counts = np.bincount([int(tournament_select(pop, 1, rng).fitness) for _ in range(10_000)], minlength=10)
    assert sps.chisquare(counts).pvalue > 0.01


def test_tournament_errors():
    with pytest.raises(ValueError):
        tournament_select([], 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        tournament_select(_pop([1, 2]), 3, np.random.default_rng(0))


def test_crossover_extremes():
    rng = np.random.default_rng(5)
    a = random_genome(HEMI_CFG, rng)
    b = random_genome(HEMI_CFG, rng)
    ga, gb = encode(a), encode(b)
    c1, c2 = crossover_genes(ga, gb, 1.0, rng)
    np.testing.assert_array_equal(c1, ga)
    np.testing.assert_array_equal(c2, gb)
    c1, c2 = crossover_genes(ga, gb, 0.0, rng)
    np.testing.assert_array_equal(c1, gb)
    np.testing.assert_array_equal(c2, ga)
    k1, k2 = uniform_crossover(a, b, 1.0, rng)
    np.testing.assert_allclose(encode(k1), ga, atol=1e-12)
    np.testing.assert_allclose(encode(k2), gb, atol=1e-12)


def test_crossover_layout_mismatch():
    a = Genome.straight(0, 0, 0, 1, (3, 3, 3, 3))
    b = Genome.straight(0, 0, 0, 1, (3, 3, 3, 4))
    with pytest.raises(ValueError):
        uniform_crossover(a, b, 0.5, np.random.default_rng(0))


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_crossover_preserves_gene_values(seed, p_c):
    rng = np.random.default_rng(seed)
    a, b = encode(random_genome(HEMI_CFG, rng)), encode(random_genome(HEMI_CFG, rng))
    c1, c2 = crossover_genes(a, b, p_c, rng)
    np.testing.assert_array_equal(np.sort(np.stack([c1, c2]), axis=0), np.sort(np.stack([a, b]), axis=0))


def test_mutation_extremes():
    rng = np.random.default_rng(8)
    g = random_genome(HEMI_CFG, rng)
    np.testing.assert_allclose(encode(mutate(g, 0.0, HEMI_CFG, rng)), encode(g), atol=1e-12)
    m = mutate(g, 1.0, HEMI_CFG, rng)
    assert _in_bounds(m, HEMI_CFG)
    assert np.all(encode(m) != encode(g))


@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_mutation_stays_in_bounds(seed, p_m):
    rng = np.random.default_rng(seed)
    assert _in_bounds(mutate(random_genome(HEMI_CFG, rng), p_m, HEMI_CFG, rng), HEMI_CFG)


# ---------------------------------------------------------------------------
# runs


def test_plane_converges_at_generation_two():
    cfg = GAConfig(n_pop=10, turn_max=0.0, patience=1, seed=3, seed_box=(0.0, 0.0, 0.0, 0.0))
    run = evolve_run(PLANE, 1.0, cfg)
    assert run.converged and run.generations_run == 2
    assert run.best.fitness == 0.0
    assert run.history == [(0.0, 0.0), (0.0, 0.0)]


def test_short_run_invariants():
    cfg = GAConfig(n_pop=12, max_generations=6, seed=21)
    run = evolve_run(SPHERE, 2.0, cfg)
    best = [b for b, _ in run.history]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert len(run.population) == cfg.n_pop
    assert all(_in_bounds(ind.genome, HEMI_CFG) for ind in run.population)
    assert run.best.fitness == min(ind.fitness for ind in run.population) == best[-1]
    assert run.best.fitness == fitness_eval(SPHERE, run.best.genome, 2.0, cfg)
    assert run.generations_run == len(run.history) <= 6


def test_run_is_deterministic():
    cfg = GAConfig(n_pop=10, max_generations=4, seed=77)
    a, b = evolve_run(SPHERE, 2.0, cfg), evolve_run(SPHERE, 2.0, cfg)
    assert a.history == b.history
    assert a.best == b.best


def test_threads_do_not_change_results():
    cfg = GAConfig(n_pop=10, max_generations=3, seed=5, batch_size=3)
    a = evolve_run(SPHERE, 2.0, cfg)
    b = evolve_run(SPHERE, 2.0, replace(cfg, threads=3))
    assert a.history == b.history


def test_initialization_failure():
    cfg = GAConfig(n_pop=4, init_retry_cap=2, coverage_threshold=1.01)
    with pytest.raises(InitializationError):
        evolve_run(SPHERE, 2.0, cfg)
