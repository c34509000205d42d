"""Simulator-free deceptive landscape with the same interface as the
treatment evaluator: genome -> (pseudo rcc, 2-D behaviour in µm)."""
import numpy as np

TRAP_CENTER = np.array([0.1, 0.1, 0.5, 0.5, 0.5, 0.5])
TRAP_RADIUS = 0.4
TRAP_DEPTH = 0.6
TARGET_CENTER = np.array([0.9, 0.9, 0.5, 0.5, 0.5, 0.5])
TARGET_RADIUS = 0.15
TARGET_DEPTH = 1.0
PLATEAU = 1400.0


def pseudo_rcc(u) -> float:
    u = np.asarray(u, dtype=float)
    trap = TRAP_DEPTH * max(0.0, 1.0 - np.linalg.norm(u - TRAP_CENTER) / TRAP_RADIUS)
    target = TARGET_DEPTH * max(0.0, 1.0 - np.linalg.norm(u - TARGET_CENTER) / TARGET_RADIUS)
    return PLATEAU * (1.0 - min(max(trap + target, 0.0), 1.0))


def deceptive_benchmark_eval(genome):
    u = genome.normalized()
    return pseudo_rcc(u), (1000.0 * float(u[0]), 1000.0 * float(u[1]))


def surrogate_evaluator(genomes, eval_ids=None):
    return [deceptive_benchmark_eval(g) for g in genomes]
