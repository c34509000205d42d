"""Parameter containers for the simulator: fixed treatment constants,
the evolved genome and the desk-scale model configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields

import numpy as np

from novabot.errors import ConfigError

MINUTES_PER_DAY = 1440.0


@dataclass(frozen=True)
class TreatmentParams:
    """Worker/cargo constants that are never evolved (PhysiCell 1.5.1 defaults)."""

    damage_rate: float = 0.03333
    repair_rate: float = 0.004167
    drug_death_rate: float = 0.004167
    elastic_coefficient: float = 0.05
    cargo_o2_uptake: float = 0.1
    cargo_apoptosis_rate: float = 4.065e-5
    cargo_rel_adhesion: float = 0.0
    cargo_rel_repulsion: float = 5.0
    max_rel_adhesion_distance: float = 1.25
    max_elastic_displacement: float = 50.0
    max_attach_distance: float = 18.0
    min_attach_distance: float = 14.0
    motility_shutdown_threshold: float = 0.001
    attachment_receptor_threshold: float = 0.1
    worker_speed: float = 2.0
    worker_apoptosis_rate: float = 0.0
    worker_o2_uptake: float = 0.1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"treatment.{f.name} must be finite and >= 0, got {v!r}")
        if not self.min_attach_distance < self.max_attach_distance:
            raise ConfigError("min_attach_distance must be < max_attach_distance")
        if not self.max_elastic_displacement > self.max_attach_distance:
            raise ConfigError("max_elastic_displacement must exceed max_attach_distance")


GENOME_FIELDS = (
    "attached_migration_bias",
    "unattached_migration_bias",
    "worker_rel_adhesion",
    "worker_persistence_time",
    "worker_rel_repulsion",
    "cargo_release_o2_threshold",
)
GENOME_BOUNDS = np.array(
    [
        [0.0, 1.0],
        [0.0, 1.0],
        [0.0, 10.0],
        [0.0, 10.0],
        [0.0, 10.0],
        [0.0, 20.0],
    ]
)
GENOME_LOWER = GENOME_BOUNDS[:, 0].copy()
GENOME_UPPER = GENOME_BOUNDS[:, 1].copy()
GENOME_WIDTH = GENOME_UPPER - GENOME_LOWER


@dataclass(frozen=True)
class Genome:
    """The six worker parameters under evolution, each in a closed range."""

    attached_migration_bias: float
    unattached_migration_bias: float
    worker_rel_adhesion: float
    worker_persistence_time: float
    worker_rel_repulsion: float
    cargo_release_o2_threshold: float

    def __post_init__(self):
        for name, (lo, hi) in zip(GENOME_FIELDS, GENOME_BOUNDS):
            v = getattr(self, name)
            if not (lo <= v <= hi):
                raise ValueError(f"{name}={v!r} outside [{lo:g}, {hi:g}]")

    @classmethod
    def from_array(cls, values) -> "Genome":
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise ValueError(f"genome needs 6 values, got shape {values.shape}")
        return cls(*(float(v) for v in values))

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in GENOME_FIELDS], dtype=float)

    def normalized(self) -> np.ndarray:
        """Alleles mapped onto the unit cube."""
        return (self.to_array() - GENOME_LOWER) / GENOME_WIDTH


# Biases high and a release threshold inside the hypoxic core; used as the
# reference "treatment works" genome in sanity checks.
HAND_TUNED_GENOME = Genome(0.9, 0.9, 1.0, 5.0, 1.0, 10.0)


@dataclass(frozen=True)
class SimConfig:
    """Desk-scale 2-D model constants. Units: µm, min, mmHg."""

    half_width: float = 500.0
    o2_spacing: float = 20.0
    o2_diffusion: float = 1.0e5
    o2_decay: float = 0.1
    o2_boundary: float = 38.0
    tumor_uptake: float = 10.0
    arrest_threshold: float = 15.0
    necrosis_threshold: float = 5.0
    necrosis_rate: float = 0.00277
    division_rate_per_hour: float = 0.04
    tumor_radius: float = 8.4
    worker_radius: float = 4.0
    cargo_radius: float = 3.0
    initial_tumor_radius: float = 200.0
    base_repulsion: float = 10.0
    base_adhesion: float = 0.4
    tumor_rel_adhesion: float = 1.0
    tumor_rel_repulsion: float = 1.0
    dt_diff: float = 0.0008
    dt_mech: float = 0.1
    dt_pheno: float = 6.0
    n_workers: int = 50
    n_cargo: int = 100
    injection_inner_gap: float = 20.0
    injection_outer_gap: float = 120.0
    chemo_sigma: float = 75.0
    drug_contact_margin: float = 2.0
    division_during_treatment: bool = False

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                continue
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"sim.{f.name} must be finite and >= 0, got {v!r}")
        for name in ("half_width", "o2_spacing", "tumor_radius", "worker_radius",
                     "cargo_radius", "dt_diff", "dt_mech", "dt_pheno", "chemo_sigma"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"sim.{name} must be > 0")
        limit = self.diffusion_dt_limit
        if self.dt_diff > limit * (1 + 1e-12):
            raise ConfigError(
                f"sim.dt_diff={self.dt_diff} exceeds the explicit-scheme limit "
                f"spacing^2/(4 D) = {limit:.6g} min"
            )
        self.substeps(self.dt_mech, self.dt_diff, "dt_mech", "dt_diff")
        self.substeps(self.dt_pheno, self.dt_mech, "dt_pheno", "dt_mech")
        cells = 2.0 * self.half_width / self.o2_spacing
        if abs(cells - round(cells)) > 1e-9:
            raise ConfigError("sim.o2_spacing must divide the domain width")
        if self.injection_outer_gap < self.injection_inner_gap:
            raise ConfigError("sim.injection_outer_gap must be >= injection_inner_gap")

    @property
    def diffusion_dt_limit(self) -> float:
        return self.o2_spacing**2 / (4.0 * self.o2_diffusion) if self.o2_diffusion > 0 else math.inf

    @property
    def grid_shape(self) -> tuple[int, int]:
        n = int(round(2.0 * self.half_width / self.o2_spacing)) + 1
        return (n, n)

    @staticmethod
    def substeps(outer: float, inner: float, outer_name="outer", inner_name="inner") -> int:
        ratio = outer / inner
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-6 * max(1.0, ratio):
            raise ConfigError(f"sim.{outer_name} must be an integer multiple of sim.{inner_name}")
        return n

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


# Simulator overrides of the CI profile. The 600 µm box keeps the Dirichlet
# boundary close to the tumor so the rim never reaches the arrest threshold;
# a smaller seed disc and a one-day grow (set by the harness) keep the tumor
# and its injection band inside the box.
FAST_PROFILE = {"half_width": 300.0, "initial_tumor_radius": 150.0}
