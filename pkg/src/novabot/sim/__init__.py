"""2-D agent-based tumor growth and worker/cargo drug-delivery simulator."""
from novabot.sim.engine import (
    SimOutcome,
    grow_tumor,
    grow_tumor_with_log,
    hex_disc,
    initial_world,
    inject_treatment,
    run_treatment,
    snapshot_from_world,
    world_from_snapshot,
)
from novabot.sim.oxygen import OxygenField, step_oxygen
from novabot.sim.params import (
    FAST_PROFILE,
    GENOME_BOUNDS,
    GENOME_FIELDS,
    HAND_TUNED_GENOME,
    Genome,
    SimConfig,
    TreatmentParams,
)
from novabot.sim.snapshot import TumorSnapshot, load_snapshot, parse_snapshot, save_snapshot
from novabot.sim.world import (
    Cell,
    Kind,
    RngStreams,
    WorldState,
    center_of_gravity,
    step_attachment_and_release,
    step_drug_and_death,
    step_mechanics,
    step_worker_motility,
)
