"""Behaviour archive, k-nearest-neighbour sparseness and hybrid fitness."""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from novabot.errors import ConfigError

NEIGHBOR_MODES = ("archive_plus_pop", "archive_only")
DEFAULT_MAX_SPARSENESS = 1000.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class BehaviorPoint:
    x: float
    y: float
    source_eval_id: int = -1
    generation: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite behaviour point ({self.x}, {self.y})")


@dataclass(frozen=True)
class HybridFitnessParams:
    rcc_thr: float = 1400.0
    s_thr: float = 600.0

    def __post_init__(self):
        if not (self.rcc_thr > 0 and self.s_thr > 0):
            raise ConfigError("rcc_thr and s_thr must be > 0")


def _xy(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 2).astype(float, copy=False)
    pts = list(points)
    if not pts:
        return np.zeros((0, 2))
    if isinstance(pts[0], BehaviorPoint):
        return np.array([(p.x, p.y) for p in pts], dtype=float)
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def _point(x):
    if isinstance(x, BehaviorPoint):
        return np.array([x.x, x.y])
    return np.asarray(x, dtype=float).reshape(2)


def sparseness(x, pool, k: int = 5, empty_value: float = DEFAULT_MAX_SPARSENESS) -> float:
    """Mean Euclidean distance from ``x`` to its ``k`` nearest pool members.

    All members are used when the pool has fewer than ``k``; an empty pool
    scores ``empty_value``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pts = _xy(pool)
    if len(pts) == 0:
        return float(empty_value)
    d = np.hypot(*(pts - _point(x)).T)
    if len(d) > k:
        d = np.partition(d, k - 1)[:k]
    return float(np.mean(d))


def hybrid_fitness(rcc: float, sparseness: float, p: HybridFitnessParams) -> float:
    """``rcc / rcc_thr - sparseness / s_thr``; lower is better."""
    return rcc / p.rcc_thr - sparseness / p.s_thr


class NoveltyArchive:
    """Append-only store of behaviour points judged novel."""

    def __init__(self, rho_min: float = 30.0, k: int = 5):
        if k < 1:
            raise ConfigError("novelty.k must be >= 1")
        if rho_min < 0:
            raise ConfigError("novelty.rho_min must be >= 0")
        self.rho_min = float(rho_min)
        self.k = int(k)
        self._points: list[BehaviorPoint] = []

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    @property
    def points(self) -> tuple:
        return tuple(self._points)

    def append(self, point: BehaviorPoint):
        self._points.append(point)

    def rows(self):
        return [(p.generation, p.source_eval_id, p.x, p.y) for p in self._points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["generation", "eval_id", "x", "y"])
        for g, e, x, y in self.rows():
            w.writerow([g, e, format(x, ".17g"), format(y, ".17g")])
        return buf.getvalue()

    def prefix_digest(self, n: int | None = None) -> str:
        """SHA-256 of the first ``n`` serialized rows (all rows by default)."""
        rows = self.rows() if n is None else self.rows()[:n]
        h = hashlib.sha256()
        for g, e, x, y in rows:
            h.update(f"{g},{e},{x:.17g},{y:.17g}\n".encode())
        return h.hexdigest()


def neighbor_pool(archive: NoveltyArchive, current_population, exclude=None,
                  mode: str = "archive_plus_pop") -> list[BehaviorPoint]:
    """Archive points plus (optionally) the population's behaviours, minus
    the query individual. Duplicates are kept."""
    if mode not in NEIGHBOR_MODES:
        raise ConfigError(f"novelty.neighbors must be one of {NEIGHBOR_MODES}")
    pool = list(archive.points)
    if mode == "archive_plus_pop":
        for ind in current_population:
            if ind is exclude:
                continue
            pool.append(BehaviorPoint(ind.behavior[0], ind.behavior[1], ind.eval_id,
                                      ind.generation))
    return pool


def maybe_admit(archive: NoveltyArchive, x: BehaviorPoint, sparseness: float,
                archive_size: int | None = None) -> bool:
    """Append ``x`` iff ``sparseness > rho_min`` or the archive is still
    bootstrapping (fewer than ``k + 1`` points).

    ``archive_size`` lets batch admission test every candidate against the
    size at the start of the batch.
    """
    size = len(archive) if archive_size is None else archive_size
    if sparseness > archive.rho_min or size < archive.k + 1:
        archive.append(x)
        return True
    return False


def score_generation(individuals, archive: NoveltyArchive, params: HybridFitnessParams, *,
                     context=(), generation: int | None = None,
                     mode: str = "archive_plus_pop",
                     empty_value: float = DEFAULT_MAX_SPARSENESS) -> list[bool]:
    """Fill ``sparseness`` and ``fitness`` on every individual, then admit.

    Every sparseness value is computed against the pool as it stood before
    this batch, so admission order inside a batch does not matter. Returns
    the per-individual admission flags.
    """
    individuals = list(individuals)
    population = individuals + [c for c in context if all(c is not i for i in individuals)]
    for ind in individuals:
        pool = neighbor_pool(archive, population, exclude=ind, mode=mode)
        ind.sparseness = sparseness(ind.behavior, pool, archive.k, empty_value)
        ind.fitness = hybrid_fitness(ind.rcc, ind.sparseness, params)
    size = len(archive)
    flags = []
    for ind in individuals:
        gen = ind.generation if generation is None else generation
        point = BehaviorPoint(ind.behavior[0], ind.behavior[1], ind.eval_id, gen)
        flags.append(maybe_admit(archive, point, ind.sparseness, archive_size=size))
    return flags


class HybridScorer:
    """GA scorer that applies the hybrid objective/novelty fitness."""

    def __init__(self, params: HybridFitnessParams, archive: NoveltyArchive | None = None,
                 mode: str = "archive_plus_pop", empty_value: float = DEFAULT_MAX_SPARSENESS):
        if mode not in NEIGHBOR_MODES:
            raise ConfigError(f"novelty.neighbors must be one of {NEIGHBOR_MODES}")
        self.params = params
        self.archive = archive if archive is not None else NoveltyArchive()
        self.mode = mode
        self.empty_value = empty_value

    def __call__(self, batch, population=(), generation=0):
        score_generation(batch, self.archive, self.params, context=population,
                         generation=generation, mode=self.mode, empty_value=self.empty_value)
