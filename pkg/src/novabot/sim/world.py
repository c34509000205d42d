"""World state and the per-step operators of the treatment simulation.

Agents are stored struct-of-arrays; an agent's id is its row index and rows
are never removed (dead agents keep their row with ``alive=False``). Every
``step_*`` function updates the state in place and returns it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from novabot import kernels
from novabot.sim.oxygen import OxygenField
from novabot.sim.params import Genome, SimConfig, TreatmentParams


class Kind(enum.IntEnum):
    TUMOR = 0
    WORKER = 1
    CARGO = 2


KIND_NAMES = {Kind.TUMOR: "Tumor", Kind.WORKER: "Worker", Kind.CARGO: "Cargo"}
# plain ints: IntEnum attribute lookup is slow inside the time loop
TUMOR, WORKER, CARGO = int(Kind.TUMOR), int(Kind.WORKER), int(Kind.CARGO)


@dataclass(frozen=True)
class Cell:
    """Read-only view of one agent."""

    id: int
    kind: Kind
    position: tuple
    radius: float
    damage: float
    alive: bool
    attached_to: int | None
    velocity_dir: tuple
    persistence_clock: float


@dataclass
class RngStreams:
    """Independent generators so that, e.g., tumor death draws line up between
    a treated run and its untreated control."""

    injection: np.random.Generator
    motility: np.random.Generator
    tumor: np.random.Generator
    agents: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RngStreams":
        ss = np.random.SeedSequence(int(seed))
        return cls(*(np.random.default_rng(s) for s in ss.spawn(4)))


@dataclass
class WorldState:
    config: SimConfig
    params: TreatmentParams
    oxygen: OxygenField
    kind: np.ndarray
    pos: np.ndarray
    radius: np.ndarray
    damage: np.ndarray
    alive: np.ndarray
    attached: np.ndarray
    direction: np.ndarray
    clock: np.ndarray
    receptor: np.ndarray
    released: np.ndarray
    time: float = 0.0
    genome: Genome | None = None
    events: dict = field(default_factory=lambda: {
        "births": 0, "necrosis_deaths": 0, "drug_deaths": 0,
        "worker_deaths": 0, "cargo_deaths": 0, "attachments": 0,
        "releases": 0, "links_broken": 0,
    })
    _rows: dict = field(default=None, init=False, repr=False, compare=False)

    @classmethod
    def from_tumor(cls, positions, radii, oxygen, config, params=None) -> "WorldState":
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        n = len(positions)
        state = cls.empty(oxygen, config, params)
        state.add_agents(TUMOR, positions, np.asarray(radii, dtype=float))
        assert state.n == n
        return state

    @classmethod
    def empty(cls, oxygen, config, params=None) -> "WorldState":
        return cls(
            config=config,
            params=params or TreatmentParams(),
            oxygen=oxygen,
            kind=np.zeros(0, dtype=np.int8),
            pos=np.zeros((0, 2)),
            radius=np.zeros(0),
            damage=np.zeros(0),
            alive=np.zeros(0, dtype=bool),
            attached=np.zeros(0, dtype=np.intp),
            direction=np.zeros((0, 2)),
            clock=np.zeros(0),
            receptor=np.zeros(0),
            released=np.zeros(0, dtype=bool),
        )

    @property
    def n(self) -> int:
        return len(self.kind)

    def add_agents(self, kind: Kind, positions, radii) -> np.ndarray:
        positions = np.asarray(positions, dtype=float).reshape(-1, 2)
        m = len(positions)
        radii = np.broadcast_to(np.asarray(radii, dtype=float), (m,))
        start = self.n
        self.kind = np.concatenate([self.kind, np.full(m, int(kind), dtype=np.int8)])
        self.pos = np.ascontiguousarray(np.concatenate([self.pos, positions]))
        self.radius = np.concatenate([self.radius, radii])
        self.damage = np.concatenate([self.damage, np.zeros(m)])
        self.alive = np.concatenate([self.alive, np.ones(m, dtype=bool)])
        self.attached = np.concatenate([self.attached, np.full(m, -1, dtype=np.intp)])
        self.direction = np.concatenate([self.direction, np.zeros((m, 2))])
        self.clock = np.concatenate([self.clock, np.zeros(m)])
        receptor = 1.0 if kind == CARGO else 0.0
        self.receptor = np.concatenate([self.receptor, np.full(m, receptor)])
        self.released = np.concatenate([self.released, np.zeros(m, dtype=bool)])
        self._rows = None
        return np.arange(start, start + m)

    def rows(self, kind) -> np.ndarray:
        """All rows of ``kind``, dead or alive (cached until agents are added)."""
        if self._rows is None:
            self._rows = {k: np.flatnonzero(self.kind == k) for k in (TUMOR, WORKER, CARGO)}
        return self._rows[int(kind)]

    def ids(self, kind: Kind, alive_only=True) -> np.ndarray:
        rows = self.rows(kind)
        return rows[self.alive[rows]] if alive_only else rows

    def count(self, kind: Kind) -> int:
        return int(np.count_nonzero((self.kind == int(kind)) & self.alive))

    def cell(self, i: int) -> Cell:
        a = int(self.attached[i])
        return Cell(
            id=int(i),
            kind=Kind(int(self.kind[i])),
            position=(float(self.pos[i, 0]), float(self.pos[i, 1])),
            radius=float(self.radius[i]),
            damage=float(self.damage[i]),
            alive=bool(self.alive[i]),
            attached_to=None if a < 0 else a,
            velocity_dir=(float(self.direction[i, 0]), float(self.direction[i, 1])),
            persistence_clock=float(self.clock[i]),
        )

    def copy(self) -> "WorldState":
        return WorldState(
            config=self.config, params=self.params, oxygen=self.oxygen.copy(),
            kind=self.kind.copy(), pos=self.pos.copy(), radius=self.radius.copy(),
            damage=self.damage.copy(), alive=self.alive.copy(),
            attached=self.attached.copy(), direction=self.direction.copy(),
            clock=self.clock.copy(), receptor=self.receptor.copy(),
            released=self.released.copy(), time=self.time, genome=self.genome,
            events=dict(self.events),
        )

    def link(self, worker: int, cargo: int):
        self.attached[worker] = cargo
        self.attached[cargo] = worker

    def unlink(self, i: int):
        j = self.attached[i]
        if j >= 0:
            self.attached[j] = -1
        self.attached[i] = -1

    def check_links(self):
        """Raise AssertionError unless every link is mutual and between a
        live worker and a live cargo."""
        for i in np.flatnonzero(self.attached >= 0):
            j = self.attached[i]
            assert self.attached[j] == i, f"link {i}->{j} not mutual"
            assert {int(self.kind[i]), int(self.kind[j])} == {WORKER, CARGO}
            assert self.alive[i] and self.alive[j]

    # per-agent mechanical coefficients
    def repulsion_coeffs(self) -> np.ndarray:
        cfg, p = self.config, self.params
        rel = np.empty(self.n)
        rel[self.kind == TUMOR] = cfg.tumor_rel_repulsion
        rel[self.kind == CARGO] = p.cargo_rel_repulsion
        rel[self.kind == WORKER] = self.genome.worker_rel_repulsion if self.genome else 1.0
        return cfg.base_repulsion * rel

    def adhesion_coeffs(self) -> np.ndarray:
        cfg, p = self.config, self.params
        rel = np.empty(self.n)
        rel[self.kind == TUMOR] = cfg.tumor_rel_adhesion
        rel[self.kind == CARGO] = p.cargo_rel_adhesion
        rel[self.kind == WORKER] = self.genome.worker_rel_adhesion if self.genome else 1.0
        return cfg.base_adhesion * rel

    def uptake_rates(self) -> np.ndarray:
        """O2 uptake rate × cell area for every agent (µm²/min)."""
        cfg, p = self.config, self.params
        rate = np.empty(self.n)
        rate[self.kind == TUMOR] = cfg.tumor_uptake
        rate[self.kind == WORKER] = p.worker_o2_uptake
        rate[self.kind == CARGO] = p.cargo_o2_uptake
        return rate * np.pi * self.radius**2


def _clamp_to_domain(state: WorldState, idx=None):
    hw = state.config.half_width
    if idx is None:
        r = state.radius[:, None]
        np.clip(state.pos, -hw + r, hw - r, out=state.pos)
    else:
        r = state.radius[idx, None]
        state.pos[idx] = np.clip(state.pos[idx], -hw + r, hw - r)


def break_long_links(state: WorldState):
    limit = state.params.max_elastic_displacement
    workers = state.rows(WORKER)
    workers = workers[state.attached[workers] >= 0]
    if workers.size == 0:
        return
    cargo = state.attached[workers]
    length = np.linalg.norm(state.pos[workers] - state.pos[cargo], axis=1)
    for w in workers[length > limit]:
        state.unlink(w)
        state.events["links_broken"] += 1


def step_mechanics(state: WorldState, dt: float, rep=None, adh=None) -> WorldState:
    """Overdamped pairwise repulsion/adhesion plus worker–cargo springs.

    Links longer than ``max_elastic_displacement`` break before and after the
    position update.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if state.n == 0:
        return state
    break_long_links(state)
    if rep is None:
        rep = state.repulsion_coeffs()
    if adh is None:
        adh = state.adhesion_coeffs()
    active = state.alive.view(np.uint8)
    vel = kernels.pair_velocities(state.pos, state.radius, rep, adh, active,
                                  state.params.max_rel_adhesion_distance,
                                  state.config.half_width)
    workers = state.rows(WORKER)
    workers = workers[state.attached[workers] >= 0]
    if workers.size:
        cargo = state.attached[workers]
        pull = state.params.elastic_coefficient * (state.pos[cargo] - state.pos[workers])
        vel[workers] += pull
        vel[cargo] -= pull
    vel[~state.alive] = 0.0
    state.pos += vel * dt
    _clamp_to_domain(state)
    break_long_links(state)
    return state


def free_cargo(state: WorldState) -> np.ndarray:
    """Cargo a worker may attach to: alive, unattached, receptor above threshold."""
    rows = state.rows(CARGO)
    sel = (state.alive[rows] & (state.attached[rows] < 0)
           & (state.receptor[rows] > state.params.attachment_receptor_threshold))
    return rows[sel]


def chemo_gradient(state: WorldState, points) -> np.ndarray:
    """Gradient of sum_c 1/(1 + |x-c|²/σ²) over free cargo."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    cargo = free_cargo(state)
    if cargo.size == 0:
        return np.zeros_like(points)
    s2 = state.config.chemo_sigma ** 2
    diff = points[:, None, :] - state.pos[cargo][None, :, :]
    k = 1.0 / (1.0 + np.sum(diff * diff, axis=-1) / s2)
    return np.sum((-2.0 / s2) * (k * k)[..., None] * diff, axis=1)


def motility_directions(guidance, bias, random_unit):
    """Blend ``b·ĝ + (1-b)·u`` and renormalize; rows are per-worker."""
    g = np.asarray(guidance, dtype=float)
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    ghat = np.divide(g, norm, out=np.zeros_like(g), where=norm > 0)
    b = np.asarray(bias, dtype=float)[:, None]
    d = b * ghat + (1.0 - b) * random_unit
    dn = np.linalg.norm(d, axis=1, keepdims=True)
    return np.where(dn > 1e-12, d / np.where(dn > 1e-12, dn, 1.0), random_unit)


def step_worker_motility(state: WorldState, genome: Genome, dt: float, rng) -> WorldState:
    """Biased persistent random walk of live workers at ``worker_speed``.

    Unattached workers follow the free-cargo attractant uphill; attached
    workers follow oxygen downhill. A worker whose guidance gradient is below
    ``motility_shutdown_threshold`` does not move this step.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    workers = state.ids(WORKER)
    if workers.size == 0:
        return state
    p = state.params
    theta = rng.uniform(0.0, 2.0 * np.pi, size=workers.size)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    attached = state.attached[workers] >= 0
    guidance = np.zeros((workers.size, 2))
    if (~attached).any():
        guidance[~attached] = chemo_gradient(state, state.pos[workers[~attached]])
    if attached.any():
        guidance[attached] = -state.oxygen.gradient(state.pos[workers[attached]])
    gmag = np.linalg.norm(guidance, axis=1)
    moving = gmag >= p.motility_shutdown_threshold

    state.clock[workers] -= dt
    # tolerance: repeated subtraction of dt leaves ~1e-16 residue on the clock
    redraw = moving & (state.clock[workers] <= 1e-9)
    if redraw.any():
        bias = np.where(attached, genome.attached_migration_bias,
                        genome.unattached_migration_bias)
        new_dir = motility_directions(guidance[redraw], bias[redraw], u[redraw])
        w = workers[redraw]
        state.direction[w] = new_dir
        state.clock[w] = genome.worker_persistence_time
    w = workers[moving]
    state.pos[w] += p.worker_speed * dt * state.direction[w]
    _clamp_to_domain(state, w)
    return state


def step_attachment_and_release(state: WorldState, genome: Genome, dt: float, rng=None) -> WorldState:
    """Form worker–cargo links inside the attachment window, then release
    cargo from workers sitting below the genome's O2 threshold."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    p = state.params
    all_workers = state.ids(WORKER)
    workers = all_workers[state.attached[all_workers] < 0]
    cargo = free_cargo(state)
    if workers.size and cargo.size:
        taken = np.zeros(cargo.size, dtype=bool)
        dist = np.linalg.norm(state.pos[workers][:, None, :] - state.pos[cargo][None, :, :], axis=-1)
        window = (dist >= p.min_attach_distance) & (dist <= p.max_attach_distance)
        for row, w in enumerate(workers):
            ok = window[row] & ~taken
            if not ok.any():
                continue
            d = np.where(ok, dist[row], np.inf)
            c = int(np.argmin(d))  # first minimum = lowest id on ties
            taken[c] = True
            state.link(int(w), int(cargo[c]))
            state.events["attachments"] += 1

    all_workers = state.ids(WORKER)
    carrying = all_workers[state.attached[all_workers] >= 0]
    if carrying.size:
        local = state.oxygen.sample(state.pos[carrying])
        for w in carrying[local < genome.cargo_release_o2_threshold]:
            c = int(state.attached[w])
            state.unlink(int(w))
            state.released[c] = True
            state.receptor[c] = 0.0
            state.events["releases"] += 1
    return state


def damage_update(damage, exposed, damage_rate, repair_rate, dt):
    """Explicit Euler update of accumulated drug damage."""
    out = np.where(exposed, damage + (damage_rate - repair_rate * damage) * dt,
                   damage - repair_rate * damage * dt)
    return np.maximum(out, 0.0)


def exposed_tumor(state: WorldState, tumor_ids) -> np.ndarray:
    cargo = state.rows(CARGO)
    cargo = cargo[state.alive[cargo] & state.released[cargo]]
    if cargo.size == 0 or tumor_ids.size == 0:
        return np.zeros(tumor_ids.size, dtype=bool)
    reach = (state.radius[tumor_ids][:, None] + state.radius[cargo][None, :]
             + state.config.drug_contact_margin)
    tree = cKDTree(state.pos[cargo])
    rmax = float(reach.max())
    hits = tree.query_ball_point(state.pos[tumor_ids], rmax)
    out = np.zeros(tumor_ids.size, dtype=bool)
    for k, near in enumerate(hits):
        if not near:
            continue
        near = np.asarray(near)
        d = np.linalg.norm(state.pos[cargo[near]] - state.pos[tumor_ids[k]], axis=1)
        out[k] = bool(np.any(d < reach[k, near]))
    return out


def step_drug_and_death(state: WorldState, params: TreatmentParams, dt: float,
                        rng: RngStreams) -> WorldState:
    """Drug damage, drug and hypoxic death of tumor cells, agent apoptosis.

    Tumor draws come from ``rng.tumor`` with one uniform per tumor row
    (dead or alive) so that paired runs see the same random numbers.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    cfg = state.config
    tumor_all = state.rows(TUMOR)
    u_drug = rng.tumor.random(tumor_all.size)
    u_necro = rng.tumor.random(tumor_all.size)
    live = state.alive[tumor_all]
    tid = tumor_all[live]

    exposed = exposed_tumor(state, tid)
    state.damage[tid] = damage_update(state.damage[tid], exposed, params.damage_rate,
                                      params.repair_rate, dt)
    p_drug = 1.0 - np.exp(-params.drug_death_rate * state.damage[tid] * dt)
    drug_dead = u_drug[live] < p_drug

    o2 = state.oxygen.sample(state.pos[tid])
    p_necro = 1.0 - np.exp(-cfg.necrosis_rate * dt)
    necro_dead = (o2 < cfg.necrosis_threshold) & (u_necro[live] < p_necro) & ~drug_dead

    state.alive[tid[drug_dead]] = False
    state.alive[tid[necro_dead]] = False
    state.events["drug_deaths"] += int(drug_dead.sum())
    state.events["necrosis_deaths"] += int(necro_dead.sum())

    for kind, rate, key in ((CARGO, params.cargo_apoptosis_rate, "cargo_deaths"),
                            (WORKER, params.worker_apoptosis_rate, "worker_deaths")):
        rows = state.rows(kind)
        u = rng.agents.random(rows.size)
        if rate <= 0:
            continue
        dying = rows[state.alive[rows] & (u < 1.0 - np.exp(-rate * dt))]
        for i in dying:
            state.unlink(int(i))
            state.alive[i] = False
        state.events[key] += int(dying.size)
    return state


def step_division(state: WorldState, dt: float, rng) -> WorldState:
    """Oxygen-gated tumor division; daughters split along a random axis."""
    cfg = state.config
    tid = state.ids(TUMOR)
    if tid.size == 0:
        return state
    u = rng.random(tid.size)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=tid.size)
    o2 = state.oxygen.sample(state.pos[tid])
    p = 1.0 - np.exp(-cfg.division_rate_per_hour / 60.0 * dt)
    dividing = (o2 > cfg.arrest_threshold) & (u < p)
    if not dividing.any():
        return state
    parents = tid[dividing]
    axis = np.stack([np.cos(theta[dividing]), np.sin(theta[dividing])], axis=1)
    offset = 0.5 * state.radius[parents, None] * axis
    daughters = state.pos[parents] + offset
    state.pos[parents] -= offset
    new = state.add_agents(TUMOR, daughters, state.radius[parents])
    _clamp_to_domain(state, new)
    _clamp_to_domain(state, parents)
    state.events["births"] += int(parents.size)
    return state


def center_of_gravity(positions, default=(0.0, 0.0)):
    """Arithmetic mean of 2-D points; ``default`` for an empty list."""
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return (float(default[0]), float(default[1]))
    m = pts.mean(axis=0)
    return (float(m[0]), float(m[1]))
