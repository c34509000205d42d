"""Experiment orchestration: shared initial populations, plain GA and hybrid
runs over the s_thr sweep, replicate-averaged evaluation and CSV output.

Every random stream is derived from the master seed with
``numpy.random.SeedSequence`` keyed by purpose, population index, method and
eval_id, so a run's outputs do not depend on which other runs share the
sweep or on the parallelism level.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from novabot import evo
from novabot.errors import ConfigError, EvaluationError
from novabot.harness.config import ExperimentConfig
from novabot.harness.surrogate import deceptive_benchmark_eval
from novabot.novelty import HybridScorer, NoveltyArchive
from novabot.sim.engine import grow_tumor, run_treatment
from novabot.sim.params import GENOME_FIELDS, Genome
from novabot.sim.snapshot import TumorSnapshot, load_snapshot, parse_snapshot, save_snapshot

log = logging.getLogger(__name__)

RUNS_HEADER = ("method,s_thr,pop_index,generation,eval_id,g1,g2,g3,g4,g5,g6,"
               "rcc_mean,behavior_x,behavior_y,sparseness,fitness")
BEST_HEADER = ("method,s_thr,pop_index,generation,pop_best_rcc,pop_best_eval_id,"
               "pop_mean_rcc,best_ever_rcc,best_ever_eval_id")

# SeedSequence purpose tags
_POPULATION, _GA, _EVAL = 1, 2, 3


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


@dataclass(frozen=True)
class Method:
    name: str                 # "ga" or "hybrid"
    s_thr: float | None = None

    @property
    def key(self) -> str:
        return self.name if self.s_thr is None else f"{self.name}_s{self.s_thr:g}"

    @property
    def seed_tag(self) -> int:
        return zlib.crc32(self.key.encode())


PLAIN_GA = Method("ga")


def methods_for(cfg: ExperimentConfig) -> list[Method]:
    out = [PLAIN_GA]
    if cfg.hybrid == "hybrid":
        out += [Method("hybrid", float(s)) for s in cfg.s_thr_sweep]
    return out


# ---------------------------------------------------------------- seeding

def _seq(master: int, *words) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, *[int(w) for w in words]])


def population_rng(master: int, pop_index: int) -> np.random.Generator:
    return np.random.default_rng(_seq(master, _POPULATION, pop_index))


def ga_rng(master: int, pop_index: int, method: Method) -> np.random.Generator:
    return np.random.default_rng(_seq(master, _GA, pop_index, method.seed_tag))


def eval_seed_base(master: int, pop_index: int, method: Method, eval_id: int,
                   population_size: int) -> int:
    """First simulator seed for one evaluation. Generation-0 evaluations are
    method-independent so every method starts from identical rows."""
    tag = 0 if eval_id < population_size else method.seed_tag
    return int(_seq(master, _EVAL, pop_index, tag, eval_id).generate_state(1)[0] >> 1)


# ------------------------------------------------------------- populations

def initial_population(master: int, pop_index: int, size: int) -> list[Genome]:
    rng = population_rng(master, pop_index)
    return [evo.random_genome(rng) for _ in range(size)]


def population_to_csv(genomes) -> str:
    buf = io.StringIO()
    buf.write(",".join(GENOME_FIELDS) + "\n")
    for g in genomes:
        buf.write(",".join(fmt(v) for v in g.to_array()) + "\n")
    return buf.getvalue()


def population_from_csv(text: str) -> list[Genome]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != tuple(GENOME_FIELDS):
        raise ValueError("population file header does not match the genome fields")
    return [Genome(*(float(v) for v in row)) for row in rows[1:] if row]


# -------------------------------------------------------------- evaluation

def evaluate_genome(genome: Genome, snapshot: TumorSnapshot, R: int, seed_base: int, *,
                    days: float = 3.0, config=None, params=None, run=run_treatment):
    """Mean rcc and component-wise mean behaviour over seeds
    ``seed_base .. seed_base + R - 1``."""
    if R < 1:
        raise ValueError("R must be >= 1")
    outcomes = [run(snapshot, genome, seed_base + r, days=days, config=config, params=params)
                for r in range(R)]
    return _average([(o.rcc, o.behavior) for o in outcomes])


def _average(results):
    rcc = sum(float(r) for r, _ in results) / len(results)
    bx = sum(float(b[0]) for _, b in results) / len(results)
    by = sum(float(b[1]) for _, b in results) / len(results)
    return rcc, (bx, by)


# worker-process globals, set once by the pool initializer
_WORKER = {}


def _init_worker(snapshot_text, sim_config, params, days):
    _WORKER.update(snapshot=parse_snapshot(snapshot_text), config=sim_config,
                   params=params, days=days)


def _replicate_task(task):
    genome_values, seed = task
    w = _WORKER
    out = run_treatment(w["snapshot"], Genome.from_array(genome_values), seed,
                        days=w["days"], config=w["config"], params=w["params"])
    return out.rcc, out.behavior


class SimulatorEvaluator:
    """Evaluator for :func:`novabot.evo.evolve` backed by the simulator.

    ``seed_for(eval_id)`` supplies each evaluation's seed base. With
    ``jobs > 1`` replicates run in a process pool; results are consumed in
    submission order so outputs do not depend on the pool width.
    """

    def __init__(self, snapshot, cfg: ExperimentConfig, pool=None):
        self.snapshot = snapshot
        self.R = cfg.replicates
        self.days = cfg.treatment_days
        self.config = cfg.sim_config()
        self.params = cfg.treatment_params()
        self.pool = pool
        self.seed_for = None
        self.calls = 0

    def __call__(self, genomes, eval_ids):
        tasks = [(g.to_array(), self.seed_for(eid) + r)
                 for g, eid in zip(genomes, eval_ids) for r in range(self.R)]
        self.calls += len(tasks)
        if self.pool is None:
            _WORKER.update(snapshot=self.snapshot, config=self.config,
                           params=self.params, days=self.days)
            flat = [_replicate_task(t) for t in tasks]
        else:
            flat = list(self.pool.map(_replicate_task, tasks))
        return [_average(flat[i * self.R:(i + 1) * self.R]) for i in range(len(genomes))]


class SurrogateEvaluator:
    """Deceptive landscape evaluator; deterministic, so one call per genome."""

    R = 1

    def __init__(self):
        self.seed_for = None
        self.calls = 0

    def __call__(self, genomes, eval_ids):
        self.calls += len(genomes)
        return [deceptive_benchmark_eval(g) for g in genomes]


def make_pool(cfg: ExperimentConfig, snapshot):
    if cfg.jobs <= 1 or cfg.evaluator != "simulator":
        return None
    return ProcessPoolExecutor(
        max_workers=cfg.jobs, initializer=_init_worker,
        initargs=(snapshot.to_text(), cfg.sim_config(), cfg.treatment_params(),
                  cfg.treatment_days))


# ----------------------------------------------------------------- one run

@dataclass
class RunResult:
    method: Method
    pop_index: int
    log: evo.RunLog
    archive: NoveltyArchive | None
    evaluations: int

    @property
    def label(self) -> str:
        return f"{self.method.key}_p{self.pop_index}"


def run_single(cfg: ExperimentConfig, method: Method, pop_index: int, genomes, evaluator
               ) -> RunResult:
    """One GA or hybrid run from a given initial population."""
    P, G = cfg.ga.population_size, cfg.ga.generations
    evaluator.seed_for = lambda eid: eval_seed_base(cfg.master_seed, pop_index, method, eid, P)
    start_calls = evaluator.calls
    archive = None
    scorer = evo.objective_scorer
    if method.name == "hybrid":
        archive = NoveltyArchive(rho_min=cfg.rho_min, k=cfg.novelty_k)
        scorer = HybridScorer(cfg.hybrid_params(method.s_thr), archive, mode=cfg.neighbors)
    run_log = evo.evolve(genomes, cfg.ga, evaluator, ga_rng(cfg.master_seed, pop_index, method),
                         scorer=scorer)
    used = evaluator.calls - start_calls
    expected = (P + P * G) * evaluator.R
    log.info("run %s_p%d: %d simulator calls", method.key, pop_index, used)
    if used != expected:
        raise EvaluationError(f"evaluation budget mismatch: {used} calls, expected {expected}")
    return RunResult(method, pop_index, run_log, archive, used)


def run_rows(result: RunResult) -> list[str]:
    m = result.method
    rows = []
    for ind in result.log.evaluated:
        vals = [m.name, fmt(m.s_thr), str(result.pop_index), str(ind.generation), str(ind.eval_id)]
        vals += [fmt(v) for v in ind.genome.to_array()]
        vals += [fmt(ind.rcc), fmt(ind.behavior[0]), fmt(ind.behavior[1]),
                 fmt(ind.sparseness if m.name == "hybrid" else None), fmt(ind.fitness)]
        rows.append(",".join(vals))
    return rows


def best_rows(result: RunResult) -> list[str]:
    """Per generation: best and mean rcc of the current population and the
    best individual evaluated so far."""
    m = result.method
    rows = []
    best_ever = None
    by_gen = {}
    for ind in result.log.evaluated:
        by_gen.setdefault(ind.generation, []).append(ind)
    for gen, pop in enumerate(result.log.populations):
        for ind in by_gen.get(gen, []):
            if best_ever is None or (ind.rcc, ind.eval_id) < (best_ever.rcc, best_ever.eval_id):
                best_ever = ind
        b = evo.best_of(pop)
        mean = sum(i.rcc for i in pop) / len(pop)
        rows.append(",".join([m.name, fmt(m.s_thr), str(result.pop_index), str(gen),
                              fmt(b.rcc), str(b.eval_id), fmt(mean),
                              fmt(best_ever.rcc), str(best_ever.eval_id)]))
    return rows


# -------------------------------------------------------------- experiment

def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def prepare_output(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_test")
        _write(probe, "")
        os.remove(probe)
    except OSError as exc:
        raise OSError(f"output directory {out_dir!r} is not writable: {exc}") from exc


def obtain_snapshot(cfg: ExperimentConfig, out_dir=None) -> TumorSnapshot:
    """Load ``cfg.snapshot`` or grow the fixed tumor (and save it to ``out_dir``)."""
    if cfg.snapshot is not None:
        return load_snapshot(cfg.snapshot)
    snap = grow_tumor(cfg.effective_growth_seed, cfg.growth_days, cfg.sim_config(),
                      cfg.treatment_params())
    if out_dir is not None:
        save_snapshot(snap, os.path.join(out_dir, "snapshot.txt"))
    return snap


def _populations(cfg: ExperimentConfig, out_dir, indices):
    pops = {}
    for i in indices:
        genomes = initial_population(cfg.master_seed, i, cfg.ga.population_size)
        if out_dir is not None:
            _write(os.path.join(out_dir, f"initial_population_{i}.csv"), population_to_csv(genomes))
        pops[i] = genomes
    return pops


def _make_evaluator(cfg, snapshot, pool):
    if cfg.evaluator == "surrogate":
        return SurrogateEvaluator()
    return SimulatorEvaluator(snapshot, cfg, pool)


def execute(cfg: ExperimentConfig, out_dir, methods, pop_indices, *, snapshot=None,
            progress=None) -> list[RunResult]:
    """Run ``methods`` × ``pop_indices`` and write every output file."""
    cfg.check_files()
    prepare_output(out_dir)
    if cfg.evaluator == "simulator" and snapshot is None:
        snapshot = obtain_snapshot(cfg, out_dir)
    pops = _populations(cfg, out_dir, pop_indices)
    pool = make_pool(cfg, snapshot) if snapshot is not None else None
    results = []
    try:
        evaluator = _make_evaluator(cfg, snapshot, pool)
        for i in pop_indices:
            for m in methods:
                res = run_single(cfg, m, i, pops[i], evaluator)
                results.append(res)
                if progress:
                    progress(res)
    finally:
        if pool is not None:
            pool.shutdown()
    write_outputs(out_dir, results)
    return results


def write_outputs(out_dir, results):
    from novabot.harness.summarize import summarize_text, write_summary

    runs = [RUNS_HEADER] + [r for res in results for r in run_rows(res)]
    runs_text = "\n".join(runs) + "\n"
    _write(os.path.join(out_dir, "runs.csv"), runs_text)
    best = [BEST_HEADER] + [r for res in results for r in best_rows(res)]
    _write(os.path.join(out_dir, "best_per_generation.csv"), "\n".join(best) + "\n")
    for res in results:
        if res.archive is not None:
            _write(os.path.join(out_dir, f"archive_{res.label}.csv"), res.archive.to_csv())
    write_summary(summarize_text(runs_text), out_dir)


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> str:
    """Full protocol: every method on every shared initial population."""
    out_dir = out_dir or cfg.output_dir
    execute(cfg, out_dir, methods_for(cfg), range(cfg.n_initial_populations))
    return out_dir


def run_one(cfg: ExperimentConfig, method: Method, pop_index: int, out_dir=None) -> str:
    """A single method on a single initial population (the ``evolve`` command)."""
    if method.name not in ("ga", "hybrid"):
        raise ConfigError(f"unknown method {method.name!r}")
    if method.name == "hybrid" and method.s_thr is None:
        raise ConfigError("hybrid runs need an s_thr value")
    if not 0 <= pop_index:
        raise ConfigError("pop_index must be >= 0")
    out_dir = out_dir or cfg.output_dir
    execute(cfg, out_dir, [method], [pop_index])
    return out_dir
