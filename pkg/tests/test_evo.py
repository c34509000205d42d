import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from novabot import evo
from novabot.errors import ConfigError, EvaluationError
from novabot.evo import GaConfig, Individual
from novabot.sim import GENOME_BOUNDS, Genome


def ind(fitness, eid=0, rcc=None, genome=None):
    g = genome or Genome(0.5, 0.5, 5, 5, 5, 10)
    return Individual(genome=g, rcc=fitness if rcc is None else rcc, behavior=(0.0, 0.0),
                      eval_id=eid, fitness=fitness)


def test_ga_config_validation():
    GaConfig()
    for bad in ({"crossover_prob": 1.5}, {"mutation_rate": -0.1}, {"tournament_size": 0},
                {"population_size": 1, "tournament_size": 2}, {"mutation_step": -1},
                {"minimize": False}):
        with pytest.raises(ConfigError):
            GaConfig(**bad)


def test_random_genome_bounds_and_mean():
    r = np.random.default_rng(0)
    arr = np.array([evo.random_genome(r).to_array() for _ in range(10_000)])
    assert np.all(arr >= GENOME_BOUNDS[:, 0]) and np.all(arr <= GENOME_BOUNDS[:, 1])
    assert abs(arr[:, 0].mean() - 0.5) < 0.02
    assert evo.random_genome(np.random.default_rng(3)) == evo.random_genome(np.random.default_rng(3))


def test_tournament_single_member():
    assert evo.tournament_select([ind(3.0)], 1, np.random.default_rng(0)) == 0


def test_tournament_strict_order_when_both_drawn():
    pop = [ind(0.9), ind(0.1)]
    for s in range(20):
        assert evo.tournament_select(pop, 2, np.random.default_rng(s)) == 1


def test_tournament_ties_go_to_lowest_index():
    pop = [ind(1.0), ind(1.0)]
    assert evo.tournament_select(pop, 2, np.random.default_rng(0)) == 0


def test_best_selection_frequency_matches_hypergeometric():
    P, T, n = 20, 2, 100_000
    pop = [ind(float(i)) for i in range(P)]
    r = np.random.default_rng(1)
    hits = sum(evo.tournament_select(pop, T, r) == 0 for _ in range(n))
    expected = 1 - comb(P - 1, T) / comb(P, T)
    assert expected == pytest.approx(0.1)
    assert abs(hits / n - expected) < 0.005


def test_tournament_bigger_than_population_rejected():
    with pytest.raises(ValueError):
        evo.tournament_select([ind(1.0)], 2, np.random.default_rng(0))


def test_crossover_disabled_returns_first_parent():
    a, b = Genome(0, 0, 0, 0, 0, 0), Genome(1, 1, 10, 10, 10, 20)
    r = np.random.default_rng(0)
    assert all(evo.uniform_crossover(a, b, 0.0, r) == a for _ in range(100))


def test_crossover_identical_parents():
    a = Genome(0.3, 0.2, 1, 2, 3, 4)
    r = np.random.default_rng(0)
    assert all(evo.uniform_crossover(a, a, 0.8, r) == a for _ in range(100))


def test_crossover_allele_mix_is_half():
    a, b = Genome(0, 0, 0, 0, 0, 0), Genome(1, 1, 10, 10, 10, 20)
    r = np.random.default_rng(2)
    from_b = np.array([evo.uniform_crossover(a, b, 1.0, r).to_array() > 0
                       for _ in range(10_000)])
    assert abs(from_b.mean() - 0.5) < 0.015


def test_mutation_off_is_identity():
    g = Genome(0.3, 0.2, 1, 2, 3, 4)
    assert evo.mutate(g, 0.0, 0.05, np.random.default_rng(0)) == g


def test_mutation_clamps_at_upper_bound():
    g = Genome(1, 1, 10, 10, 10, 20)

    class Positive:  # forced positive steps, every allele hit
        def random(self, n):
            return np.zeros(n)

        def uniform(self, lo, hi, size):
            return np.full(size, hi)

    assert evo.mutate(g, 1.0, 0.05, Positive()) == g


def test_mutation_rate_expectation():
    g = Genome(0.5, 0.5, 5, 5, 5, 10)
    r = np.random.default_rng(4)
    changed = [np.count_nonzero(evo.mutate(g, 0.2, 0.05, r).to_array() != g.to_array())
               for _ in range(10_000)]
    assert abs(np.mean(changed) - 1.2) < 0.05


@settings(max_examples=60, deadline=None)
@given(vals=st.lists(st.floats(0, 1), min_size=6, max_size=6), mu=st.floats(0, 1),
       s=st.floats(0, 2), seed=st.integers(0, 2**31))
def test_mutation_step_limit_and_bounds(vals, mu, s, seed):
    g = Genome.from_array(GENOME_BOUNDS[:, 0] + np.array(vals) * (GENOME_BOUNDS[:, 1] -
                                                                  GENOME_BOUNDS[:, 0]))
    m = evo.mutate(g, mu, s, np.random.default_rng(seed)).to_array()
    width = GENOME_BOUNDS[:, 1] - GENOME_BOUNDS[:, 0]
    assert np.all(np.abs(m - g.to_array()) <= s * width + 1e-12)
    assert np.all(m >= GENOME_BOUNDS[:, 0]) and np.all(m <= GENOME_BOUNDS[:, 1])


def test_replacement_keeps_population_when_offspring_worse():
    pop = [ind(1.0, 0), ind(2.0, 1), ind(3.0, 2), ind(4.0, 3)]
    kids = [ind(9.0, 10 + i) for i in range(4)]
    groups = [(0, 1), (2, 3), (1, 3), (0, 2)]
    assert evo.apply_replacement(pop, kids, groups) == pop


def test_strictly_best_offspring_always_survives():
    """Exhaustive over every size-2 tournament of a 4-member population."""
    import itertools
    pop = [ind(1.0, 0), ind(2.0, 1), ind(3.0, 2), ind(4.0, 3)]
    child = ind(0.5, 99)
    for group in itertools.combinations(range(4), 2):
        out = evo.apply_replacement(pop, [child], [group])
        assert child in out
        worst = max(group, key=lambda i: pop[i].fitness)
        assert pop[worst] not in out


def test_replacement_is_weak_and_ties_pick_lowest_index():
    pop = [ind(2.0, 0), ind(2.0, 1)]
    out = evo.apply_replacement(pop, [ind(2.0, 5)], [(0, 1)])
    assert out[0].eval_id == 5 and out[1].eval_id == 1


def test_best_of_examples():
    pop = [ind(0, 0, rcc=900), ind(0, 1, rcc=850), ind(0, 2, rcc=1200)]
    assert evo.best_of(pop).eval_id == 1
    assert evo.best_of([pop[2]]) is pop[2]
    assert evo.best_of([ind(0, 7, rcc=5), ind(0, 3, rcc=5)]).eval_id == 3


def _quadratic_eval(genomes, eval_ids):
    return [(float(np.sum((g.normalized() - 0.3) ** 2) * 1000), (g.normalized()[0] * 1000, 0.0))
            for g in genomes]


def _initial(seed, P=20):
    r = np.random.default_rng(seed)
    return [evo.random_genome(r) for _ in range(P)]


def test_evolve_invariants():
    cfg = GaConfig()
    run = evo.evolve(_initial(0), cfg, _quadratic_eval, np.random.default_rng(1))
    assert len(run.populations) == cfg.generations + 1
    assert all(len(p) == cfg.population_size for p in run.populations)
    bests = run.best_rcc
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
    assert len(run.evaluated) == cfg.population_size * (cfg.generations + 1)
    assert [i.eval_id for i in run.evaluated] == list(range(len(run.evaluated)))


def test_evolve_is_pure_function_of_seed():
    cfg = GaConfig(generations=4)
    a = evo.evolve(_initial(5), cfg, _quadratic_eval, np.random.default_rng(9))
    b = evo.evolve(_initial(5), cfg, _quadratic_eval, np.random.default_rng(9))
    assert [(i.genome, i.rcc) for i in a.evaluated] == [(i.genome, i.rcc) for i in b.evaluated]


def test_affine_fitness_map_leaves_run_unchanged():
    cfg = GaConfig(generations=3)

    def affine(batch, population=(), generation=0):
        for i in batch:
            i.fitness = 3.0 * i.rcc + 7.0

    a = evo.evolve(_initial(2), cfg, _quadratic_eval, np.random.default_rng(4))
    b = evo.evolve(_initial(2), cfg, _quadratic_eval, np.random.default_rng(4), scorer=affine)
    assert [i.genome for i in a.populations[-1]] == [i.genome for i in b.populations[-1]]


def test_evaluator_failure_aborts_generation():
    cfg = GaConfig(generations=1)
    pop = evo.evaluate_batch(_initial(0), range(20), 0, _quadratic_eval)
    evo.objective_scorer(pop)
    snapshot = list(pop)

    def broken(genomes, ids):
        raise RuntimeError("simulator crashed")

    with pytest.raises(EvaluationError, match="generation 1"):
        evo.next_generation(pop, cfg, broken, np.random.default_rng(0))
    assert pop == snapshot


def test_non_finite_fitness_rejected():
    cfg = GaConfig(generations=1)
    pop = evo.evaluate_batch(_initial(0), range(20), 0, _quadratic_eval)
    evo.objective_scorer(pop)

    def nan_scorer(batch, population=(), generation=0):
        for i in batch:
            i.fitness = math.nan

    with pytest.raises(EvaluationError):
        evo.next_generation(pop, cfg, _quadratic_eval, np.random.default_rng(0),
                            scorer=nan_scorer)
