"""Generational GA over the bounded six-allele worker genome.

Selection and replacement both use size-``T`` tournaments; fitness is always
minimized. The fitness of an individual is assigned once, when it is
created, by a pluggable scorer (plain rcc, or the hybrid novelty score).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from novabot.errors import ConfigError, EvaluationError
from novabot.sim.params import GENOME_LOWER, GENOME_UPPER, GENOME_WIDTH, Genome


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    tournament_size: int = 2
    crossover_prob: float = 0.8
    mutation_rate: float = 0.2
    mutation_step: float = 0.05
    generations: int = 10
    minimize: bool = True

    def __post_init__(self):
        if not (0.0 <= self.crossover_prob <= 1.0):
            raise ConfigError("ga.crossover_prob must lie in [0, 1]")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ConfigError("ga.mutation_rate must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ConfigError("ga.tournament_size must be >= 1")
        if self.population_size < self.tournament_size:
            raise ConfigError("ga.population_size must be >= ga.tournament_size")
        if self.mutation_step < 0:
            raise ConfigError("ga.mutation_step must be >= 0")
        if self.generations < 0:
            raise ConfigError("ga.generations must be >= 0")
        if not self.minimize:
            raise ConfigError("only minimization is supported")


@dataclass
class Individual:
    genome: Genome
    rcc: float
    behavior: tuple
    eval_id: int
    generation: int = 0
    sparseness: float = math.nan
    fitness: float = math.nan


# evaluator(genomes, eval_ids) -> [(rcc, (bx, by)), ...]
Evaluator = Callable[[Sequence[Genome], Sequence[int]], Sequence[tuple]]
# scorer(batch, population, generation) fills batch[i].fitness in place
Scorer = Callable[[list, list, int], None]


def objective_scorer(batch, population=(), generation=0):
    """Plain GA: fitness is the remaining cancer cell count."""
    for ind in batch:
        ind.fitness = float(ind.rcc)


def random_genome(rng) -> Genome:
    return Genome.from_array(rng.uniform(GENOME_LOWER, GENOME_UPPER))


def tournament_select(pop, T: int, rng) -> int:
    """Index of the fittest among ``T`` distinct uniformly drawn members."""
    n = len(pop)
    if n == 0:
        raise ValueError("empty population")
    if T > n:
        raise ValueError(f"tournament size {T} exceeds population {n}")
    picks = np.sort(rng.choice(n, size=T, replace=False))
    return int(min(picks, key=lambda i: (pop[i].fitness, i)))


def uniform_crossover(a: Genome, b: Genome, X: float, rng) -> Genome:
    if rng.random() >= X:
        return a
    take_b = rng.random(6) < 0.5
    return Genome.from_array(np.where(take_b, b.to_array(), a.to_array()))


def mutate(g: Genome, mu: float, s: float, rng) -> Genome:
    """Per-allele uniform step in ``±s`` of the allele's range, then clamp."""
    hit = rng.random(6) < mu
    step = rng.uniform(-s, s, size=6) * GENOME_WIDTH
    values = g.to_array()
    moved = np.clip(values + step, GENOME_LOWER, GENOME_UPPER)
    return Genome.from_array(np.where(hit, moved, values))


def replacement_tournament_draws(n: int, count: int, T: int, rng):
    return [tuple(int(i) for i in np.sort(rng.choice(n, size=T, replace=False)))
            for _ in range(count)]


def apply_replacement(pop, offspring, tournaments):
    """Each offspring displaces the worst of its tournament if it is no worse.

    ``tournaments[i]`` lists population indices for offspring ``i``; the
    worst member is the highest fitness, lowest index on ties.
    """
    pop = list(pop)
    for child, group in zip(offspring, tournaments):
        worst = max(group, key=lambda i: (pop[i].fitness, -i))
        if child.fitness <= pop[worst].fitness:
            pop[worst] = child
    return pop


def breed(pop, cfg: GaConfig, rng) -> list[Genome]:
    children = []
    for _ in range(cfg.population_size):
        a = pop[tournament_select(pop, cfg.tournament_size, rng)].genome
        b = pop[tournament_select(pop, cfg.tournament_size, rng)].genome
        child = uniform_crossover(a, b, cfg.crossover_prob, rng)
        children.append(mutate(child, cfg.mutation_rate, cfg.mutation_step, rng))
    return children


def evaluate_batch(genomes, eval_ids, generation, evaluator) -> list[Individual]:
    try:
        results = list(evaluator(list(genomes), list(eval_ids)))
    except EvaluationError:
        raise
    except Exception as exc:
        raise EvaluationError(f"evaluation of generation {generation} failed: {exc}") from exc
    if len(results) != len(genomes):
        raise EvaluationError(f"evaluator returned {len(results)} results for {len(genomes)} genomes")
    out = []
    for g, eid, (rcc, behavior) in zip(genomes, eval_ids, results):
        out.append(Individual(genome=g, rcc=float(rcc),
                              behavior=(float(behavior[0]), float(behavior[1])),
                              eval_id=int(eid), generation=generation))
    return out


def next_generation(pop, cfg: GaConfig, evaluator: Evaluator, rng, *,
                    scorer: Scorer = objective_scorer, generation: int = 1,
                    first_eval_id: int | None = None):
    """One generation: breed P offspring, evaluate, score, replace.

    Returns ``(new_population, offspring)``. Nothing is modified if the
    evaluator raises.
    """
    if len(pop) != cfg.population_size:
        raise ValueError(f"population has {len(pop)} members, expected {cfg.population_size}")
    if first_eval_id is None:
        first_eval_id = max(ind.eval_id for ind in pop) + 1
    genomes = breed(pop, cfg, rng)
    ids = range(first_eval_id, first_eval_id + len(genomes))
    offspring = evaluate_batch(genomes, ids, generation, evaluator)
    scorer(offspring, list(pop), generation)
    for child in offspring:
        if not math.isfinite(child.fitness):
            raise EvaluationError(f"non-finite fitness for eval_id {child.eval_id}")
    draws = replacement_tournament_draws(len(pop), len(offspring), cfg.tournament_size, rng)
    return apply_replacement(pop, offspring, draws), offspring


def best_of(pop) -> Individual:
    """Lowest rcc (not lowest fitness); ties go to the lowest eval_id."""
    if not pop:
        raise ValueError("empty population")
    return min(pop, key=lambda ind: (ind.rcc, ind.eval_id))


def best_rcc_history(populations) -> list[float]:
    return [best_of(p).rcc for p in populations]


@dataclass
class RunLog:
    """Every evaluated individual plus the population after each generation."""

    evaluated: list = field(default_factory=list)
    populations: list = field(default_factory=list)

    @property
    def best_rcc(self):
        return best_rcc_history(self.populations)


def evolve(initial_genomes, cfg: GaConfig, evaluator: Evaluator, rng, *,
           scorer: Scorer = objective_scorer, on_generation=None) -> RunLog:
    """Evaluate the initial genomes (generation 0) then run ``cfg.generations``."""
    if len(initial_genomes) != cfg.population_size:
        raise ValueError("initial population size does not match ga.population_size")
    log = RunLog()
    pop = evaluate_batch(initial_genomes, range(len(initial_genomes)), 0, evaluator)
    scorer(pop, [], 0)
    log.evaluated.extend(pop)
    log.populations.append(list(pop))
    if on_generation:
        on_generation(0, pop, pop)
    next_id = len(pop)
    for gen in range(1, cfg.generations + 1):
        pop, offspring = next_generation(pop, cfg, evaluator, rng, scorer=scorer,
                                         generation=gen, first_eval_id=next_id)
        next_id += len(offspring)
        log.evaluated.extend(offspring)
        log.populations.append(list(pop))
        if on_generation:
            on_generation(gen, pop, offspring)
    return log


def with_fitness(ind: Individual, fitness: float) -> Individual:
    return replace(ind, fitness=fitness)
