"""Experiment configuration and the flat ``key = value`` file format.

Example::

    # three shared populations, two sweep points
    master_seed = 11
    replicates = 5
    s_thr_sweep = 600, 800
    ga.generations = 10
    sim.half_width = 300
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field, fields

from novabot.errors import ConfigError
from novabot.evo import GaConfig
from novabot.novelty import NEIGHBOR_MODES, HybridFitnessParams
from novabot.sim.params import FAST_PROFILE, SimConfig, TreatmentParams

HYBRID_MODES = ("hybrid", "objective_only")
EVALUATORS = ("simulator", "surrogate")
FAST_REPLICATES = 3
FAST_GROWTH_DAYS = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    replicates: int = 5
    growth_days: float = 7.0
    treatment_days: float = 3.0
    growth_seed: int | None = None
    ga: GaConfig = field(default_factory=GaConfig)
    hybrid: str = "hybrid"
    s_thr_sweep: tuple = (200.0, 400.0, 600.0, 800.0, 1000.0)
    rcc_thr: float = 1400.0
    n_initial_populations: int = 3
    rho_min: float = 30.0
    novelty_k: int = 5
    neighbors: str = "archive_plus_pop"
    sim: tuple = ()          # (name, value) overrides of SimConfig
    treatment: tuple = ()    # (name, value) overrides of TreatmentParams
    output_dir: str = "out"
    snapshot: str | None = None
    evaluator: str = "simulator"
    jobs: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n_initial_populations < 1:
            raise ConfigError("n_initial_populations must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.growth_days < 0:
            raise ConfigError("growth_days must be >= 0")
        if not self.treatment_days > 0:
            raise ConfigError("treatment_days must be > 0")
        if not self.s_thr_sweep:
            raise ConfigError("s_thr_sweep must not be empty")
        if any(not (math.isfinite(s) and s > 0) for s in self.s_thr_sweep):
            raise ConfigError("s_thr_sweep values must be > 0")
        if len(set(self.s_thr_sweep)) != len(self.s_thr_sweep):
            raise ConfigError("s_thr_sweep values must be distinct")
        if self.hybrid not in HYBRID_MODES:
            raise ConfigError(f"hybrid must be one of {HYBRID_MODES}")
        if self.neighbors not in NEIGHBOR_MODES:
            raise ConfigError(f"novelty.neighbors must be one of {NEIGHBOR_MODES}")
        if self.evaluator not in EVALUATORS:
            raise ConfigError(f"evaluator must be one of {EVALUATORS}")
        if self.novelty_k < 1 or self.rho_min < 0:
            raise ConfigError("novelty.k must be >= 1 and novelty.rho_min >= 0")
        HybridFitnessParams(self.rcc_thr, 1.0)
        # building these validates the overrides up front
        self.sim_config()
        self.treatment_params()

    def sim_config(self) -> SimConfig:
        try:
            return SimConfig(**dict(self.sim))
        except TypeError as exc:
            raise ConfigError(f"bad sim override: {exc}") from None

    def treatment_params(self) -> TreatmentParams:
        try:
            return TreatmentParams(**dict(self.treatment))
        except TypeError as exc:
            raise ConfigError(f"bad treatment override: {exc}") from None

    def hybrid_params(self, s_thr: float) -> HybridFitnessParams:
        return HybridFitnessParams(self.rcc_thr, float(s_thr))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def with_sim(self, **overrides) -> "ExperimentConfig":
        merged = dict(self.sim)
        merged.update(overrides)
        return self.replace(sim=tuple(sorted(merged.items())))

    def fast(self) -> "ExperimentConfig":
        """CI profile: 600 µm domain, three replicates, one-day grow."""
        return self.with_sim(**FAST_PROFILE).replace(
            replicates=FAST_REPLICATES, growth_days=FAST_GROWTH_DAYS)

    def check_files(self):
        if self.snapshot is not None and not os.path.isfile(self.snapshot):
            raise ConfigError(f"snapshot file not found: {self.snapshot}")

    @property
    def effective_growth_seed(self) -> int:
        return self.master_seed if self.growth_seed is None else self.growth_seed


def _to_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_int(text: str) -> int:
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _float_list(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


def _optional_str(text: str):
    return None if text.strip().lower() in ("", "none") else text.strip()


def _converter(default):
    if isinstance(default, bool):
        return _to_bool
    if isinstance(default, int):
        return _to_int
    return float


_TOP_LEVEL = {
    "master_seed": ("master_seed", _to_int),
    "replicates": ("replicates", _to_int),
    "growth_days": ("growth_days", float),
    "treatment_days": ("treatment_days", float),
    "growth_seed": ("growth_seed", lambda t: None if _optional_str(t) is None else _to_int(t)),
    "hybrid": ("hybrid", str.strip),
    "s_thr_sweep": ("s_thr_sweep", _float_list),
    "n_initial_populations": ("n_initial_populations", _to_int),
    "output_dir": ("output_dir", str.strip),
    "snapshot": ("snapshot", _optional_str),
    "evaluator": ("evaluator", str.strip),
    "jobs": ("jobs", _to_int),
    "novelty.rcc_thr": ("rcc_thr", float),
    "novelty.rho_min": ("rho_min", float),
    "novelty.k": ("novelty_k", _to_int),
    "novelty.neighbors": ("neighbors", str.strip),
}


def _section_fields(cls):
    inst = cls()
    return {f.name: _converter(getattr(inst, f.name)) for f in fields(cls)}


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse the flat config format; unknown or repeated keys are errors."""
    ga_fields = _section_fields(GaConfig)
    sim_fields = _section_fields(SimConfig)
    tp_fields = _section_fields(TreatmentParams)
    top, ga, sim, tp = {}, {}, {}, {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            if key in _TOP_LEVEL:
                name, conv = _TOP_LEVEL[key]
                top[name] = conv(value)
            elif key.startswith("ga.") and key[3:] in ga_fields:
                ga[key[3:]] = ga_fields[key[3:]](value)
            elif key.startswith("sim.") and key[4:] in sim_fields:
                sim[key[4:]] = sim_fields[key[4:]](value)
            elif key.startswith("treatment.") and key[10:] in tp_fields:
                tp[key[10:]] = tp_fields[key[10:]](value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    try:
        cfg = ExperimentConfig(ga=GaConfig(**ga), sim=tuple(sorted(sim.items())),
                               treatment=tuple(sorted(tp.items())), **top)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    return parse_config_text(text, str(path))


def config_to_text(cfg: ExperimentConfig) -> str:
    """Serialize every setting; ``parse_config_text`` inverts this."""
    lines = []
    inv = {v[0]: k for k, v in _TOP_LEVEL.items()}
    for name in ("master_seed", "replicates", "growth_days", "treatment_days", "growth_seed",
                 "hybrid", "s_thr_sweep", "n_initial_populations", "output_dir", "snapshot",
                 "evaluator", "jobs", "rcc_thr", "rho_min", "novelty_k", "neighbors"):
        v = getattr(cfg, name)
        if v is None:
            v = "none"
        elif isinstance(v, tuple):
            v = ", ".join(format(x, ".17g") for x in v)
        elif isinstance(v, float):
            v = format(v, ".17g")
        lines.append(f"{inv[name]} = {v}")
    for f in fields(GaConfig):
        lines.append(f"ga.{f.name} = {_fmt(getattr(cfg.ga, f.name))}")
    for k, v in cfg.sim:
        lines.append(f"sim.{k} = {_fmt(v)}")
    for k, v in cfg.treatment:
        lines.append(f"treatment.{k} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)
