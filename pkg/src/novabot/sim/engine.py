"""Tumor growth, treatment injection and the operator-split time loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from novabot.errors import SimulationError
from novabot.sim.oxygen import OxygenField
from novabot.sim.params import MINUTES_PER_DAY, Genome, SimConfig, TreatmentParams
from novabot.sim.snapshot import FORMAT_VERSION, TumorSnapshot
from novabot.sim.world import (
    Kind,
    RngStreams,
    WorldState,
    center_of_gravity,
    step_attachment_and_release,
    step_division,
    step_drug_and_death,
    step_mechanics,
    step_worker_motility,
)


@dataclass(frozen=True)
class SimOutcome:
    rcc: int
    behavior: tuple
    elapsed_sim_time: float
    workers_extinct: bool = False
    events: dict = field(default_factory=dict, compare=False)


def hex_disc(disc_radius: float, cell_radius: float) -> np.ndarray:
    """Centers of a hexagonal packing (pitch = one cell diameter) that fall
    inside a disc centered on the origin."""
    pitch = 2.0 * cell_radius
    dy = pitch * math.sqrt(3.0) / 2.0
    rows = int(math.ceil(disc_radius / dy)) + 1
    cols = int(math.ceil(disc_radius / pitch)) + 2
    pts = []
    for k in range(-rows, rows + 1):
        y = k * dy
        shift = 0.5 * pitch if k % 2 else 0.0
        for m in range(-cols, cols + 1):
            x = m * pitch + shift
            if x * x + y * y <= disc_radius * disc_radius:
                pts.append((x, y))
    return np.array(pts, dtype=float).reshape(-1, 2)


def _integrate(state: WorldState, minutes: float, streams: RngStreams, *,
               genome: Genome | None, divide: bool) -> WorldState:
    cfg = state.config
    n_diff = cfg.substeps(cfg.dt_mech, cfg.dt_diff)
    n_pheno = cfg.substeps(cfg.dt_pheno, cfg.dt_mech)
    n_mech = int(round(minutes / cfg.dt_mech))
    params = state.params
    cached_n = -1
    for step in range(n_mech):
        if state.n != cached_n:
            cached_n = state.n
            rep = state.repulsion_coeffs()
            adh = state.adhesion_coeffs()
            rates = state.uptake_rates()
        if state.n:
            uptake = state.oxygen.uptake_grid(state.pos, rates, state.alive.view(np.uint8))
        else:
            uptake = np.zeros(state.oxygen.shape)
        state.oxygen.advance(uptake, cfg.dt_diff, n_diff)
        step_mechanics(state, cfg.dt_mech, rep, adh)
        if genome is not None:
            step_worker_motility(state, genome, cfg.dt_mech, streams.motility)
            step_attachment_and_release(state, genome, cfg.dt_mech, streams.motility)
        if (step + 1) % n_pheno == 0:
            step_drug_and_death(state, params, cfg.dt_pheno, streams)
            if divide:
                step_division(state, cfg.dt_pheno, streams.tumor)
        state.time += cfg.dt_mech
    return state


def initial_world(config: SimConfig, params: TreatmentParams | None = None) -> WorldState:
    pos = hex_disc(config.initial_tumor_radius, config.tumor_radius)
    return WorldState.from_tumor(pos, np.full(len(pos), config.tumor_radius),
                                 OxygenField.uniform(config), config, params)


def snapshot_from_world(state: WorldState, seed: int) -> TumorSnapshot:
    tid = state.ids(Kind.TUMOR)
    return TumorSnapshot(
        format_version=FORMAT_VERSION,
        domain_half_width=state.config.half_width,
        rng_seed_of_growth=int(seed),
        positions=state.pos[tid].copy(),
        radii=state.radius[tid].copy(),
        oxygen_grid=state.oxygen.grid.copy(),
        oxygen_spacing=state.oxygen.spacing,
    )


def world_from_snapshot(snapshot: TumorSnapshot, config: SimConfig | None = None,
                        params: TreatmentParams | None = None) -> WorldState:
    if snapshot.count == 0:
        raise SimulationError("snapshot contains no tumor cells")
    config = config or SimConfig()
    if config.half_width != snapshot.domain_half_width or \
            config.o2_spacing != snapshot.oxygen_spacing:
        config = config.replace(half_width=snapshot.domain_half_width,
                                o2_spacing=snapshot.oxygen_spacing)
    oxygen = OxygenField.uniform(config)
    if oxygen.shape != snapshot.oxygen_grid.shape:
        raise SimulationError(
            f"snapshot oxygen grid {snapshot.oxygen_grid.shape} does not match domain {oxygen.shape}")
    oxygen.grid[...] = snapshot.oxygen_grid
    return WorldState.from_tumor(snapshot.positions, snapshot.radii, oxygen, config, params)


def grow_tumor_with_log(seed: int, days: float, config: SimConfig | None = None,
                        params: TreatmentParams | None = None):
    """Grow the initial disc for ``days``; returns ``(snapshot, events)``."""
    if days < 0:
        raise ValueError("days must be >= 0")
    config = config or SimConfig()
    state = initial_world(config, params)
    streams = RngStreams.from_seed(seed)
    _integrate(state, days * MINUTES_PER_DAY, streams, genome=None, divide=True)
    return snapshot_from_world(state, seed), dict(state.events)


def grow_tumor(seed: int, days: float, config: SimConfig | None = None,
               params: TreatmentParams | None = None) -> TumorSnapshot:
    return grow_tumor_with_log(seed, days, config, params)[0]


def _sample_annulus(rng, n, center, r_in, r_out, half_width, margin):
    out = np.empty((n, 2))
    lim = half_width - margin
    filled = 0
    tries = 0
    while filled < n:
        tries += 1
        if tries > 1000:
            raise SimulationError("injection band lies outside the domain")
        m = 2 * (n - filled) + 8
        r = np.sqrt(rng.uniform(r_in**2, r_out**2, size=m))
        th = rng.uniform(0.0, 2.0 * np.pi, size=m)
        cand = center + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
        ok = np.all(np.abs(cand) <= lim, axis=1)
        cand = cand[ok][: n - filled]
        out[filled:filled + len(cand)] = cand
        filled += len(cand)
    return out


def tumor_extent(state: WorldState):
    tid = state.ids(Kind.TUMOR)
    center = state.pos[tid].mean(axis=0)
    reach = np.linalg.norm(state.pos[tid] - center, axis=1) + state.radius[tid]
    return center, float(reach.max())


def inject_treatment(state: WorldState, genome: Genome, seed, n_workers=None,
                     n_cargo=None) -> WorldState:
    """Place workers then cargo uniformly in the band around the tumor.

    ``seed`` may be an int or a ``numpy.random.Generator``. Resets the clock
    to the start of treatment.
    """
    if np.any(state.kind != Kind.TUMOR):
        raise SimulationError("inject_treatment expects a tumor-only state")
    cfg = state.config
    n_workers = cfg.n_workers if n_workers is None else n_workers
    n_cargo = cfg.n_cargo if n_cargo is None else n_cargo
    rng = seed if isinstance(seed, np.random.Generator) else RngStreams.from_seed(seed).injection
    state.genome = genome
    state.time = 0.0
    if n_workers + n_cargo == 0:
        return state
    center, r = tumor_extent(state)
    margin = max(cfg.worker_radius, cfg.cargo_radius)
    r_in, r_out = r + cfg.injection_inner_gap, r + cfg.injection_outer_gap
    if n_workers:
        state.add_agents(Kind.WORKER, _sample_annulus(rng, n_workers, center, r_in, r_out,
                                                      cfg.half_width, margin), cfg.worker_radius)
    if n_cargo:
        state.add_agents(Kind.CARGO, _sample_annulus(rng, n_cargo, center, r_in, r_out,
                                                     cfg.half_width, margin), cfg.cargo_radius)
    return state


def _check_genome(genome: Genome):
    # Genome validates on construction; re-check in case of object.__setattr__ abuse.
    Genome.from_array(genome.to_array())


def run_treatment(snapshot: TumorSnapshot, genome: Genome, seed: int, days: float = 3.0,
                  config: SimConfig | None = None, params: TreatmentParams | None = None,
                  ) -> SimOutcome:
    """Load the snapshot, inject the treatment and simulate ``days``.

    The behaviour descriptor is the mean position of live workers, or the
    domain center (flagged) when none survive or none were injected.
    """
    if days <= 0:
        raise ValueError("days must be > 0")
    _check_genome(genome)
    state = world_from_snapshot(snapshot, config, params)
    streams = RngStreams.from_seed(seed)
    inject_treatment(state, genome, streams.injection)
    division = state.config.division_during_treatment
    _integrate(state, days * MINUTES_PER_DAY, streams, genome=genome, divide=division)
    workers = state.ids(Kind.WORKER)
    behavior = center_of_gravity(state.pos[workers])
    return SimOutcome(
        rcc=state.count(Kind.TUMOR),
        behavior=behavior,
        elapsed_sim_time=state.time,
        workers_extinct=workers.size == 0,
        events=dict(state.events),
    )
