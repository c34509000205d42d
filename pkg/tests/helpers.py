import numpy as np

from novabot.sim import OxygenField, SimConfig, WorldState
from novabot.sim.params import HAND_TUNED_GENOME
from novabot.sim.world import CARGO, TUMOR, WORKER


def world(agents, half_width=100.0, genome=HAND_TUNED_GENOME, o2=None, config=None, params=None):
    """Build a state from ``[(kind, x, y), ...]`` with default radii."""
    cfg = config or SimConfig(half_width=half_width)
    field = OxygenField.uniform(cfg)
    if o2 is not None:
        xs, ys = field.node_coords()
        field.grid[...] = o2(xs[None, :], ys[:, None])
    st = WorldState.empty(field, cfg, params)
    st.genome = genome
    radius = {TUMOR: cfg.tumor_radius, WORKER: cfg.worker_radius, CARGO: cfg.cargo_radius}
    for kind, x, y in agents:
        st.add_agents(kind, np.array([[x, y]]), radius[kind])
    return st


__all__ = ["world", "TUMOR", "WORKER", "CARGO"]
