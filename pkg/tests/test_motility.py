import numpy as np
import pytest

from novabot.sim import Genome
from novabot.sim.world import motility_directions, step_worker_motility

from helpers import CARGO, WORKER, world


def test_full_bias_follows_gradient():
    g = np.array([[3.0, 0.0]])
    u = np.array([[0.0, 1.0]])
    np.testing.assert_allclose(motility_directions(g, [1.0], u), [[1.0, 0.0]])


def test_zero_bias_uses_random_direction():
    u = np.array([[0.6, 0.8]])
    np.testing.assert_allclose(motility_directions(np.array([[5.0, 1.0]]), [0.0], u), u)


def test_zero_bias_mean_displacement_vanishes():
    r = np.random.default_rng(0)
    n = 10_000
    th = r.uniform(0, 2 * np.pi, n)
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    d = motility_directions(np.tile([1.0, 0.0], (n, 1)), np.zeros(n), u)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
    sigma = np.sqrt(0.5 / n)  # per-component std of the mean of unit vectors
    assert np.all(np.abs(d.mean(axis=0)) < 3 * sigma)


def _genome(**kw):
    base = dict(attached_migration_bias=1.0, unattached_migration_bias=1.0,
                worker_rel_adhesion=0.0, worker_persistence_time=0.0,
                worker_rel_repulsion=0.0, cargo_release_o2_threshold=10.0)
    base.update(kw)
    return Genome(**base)


def test_unattached_worker_climbs_toward_cargo():
    s = world([(WORKER, 0, 0), (CARGO, 50, 0)], genome=_genome())
    step_worker_motility(s, s.genome, 0.1, np.random.default_rng(1))
    assert s.pos[0, 0] == pytest.approx(0.2)
    assert s.pos[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_one_step_displacement_magnitude():
    g = _genome(unattached_migration_bias=0.3)
    s = world([(WORKER, 0, 0), (CARGO, 40, 25)], genome=g)
    start = s.pos[0].copy()
    step_worker_motility(s, g, 0.1, np.random.default_rng(2))
    assert np.linalg.norm(s.pos[0] - start) == pytest.approx(0.2)


def test_attached_worker_descends_oxygen():
    # O2 falls toward -x
    s = world([(WORKER, 0, 0), (CARGO, 15, 0)], genome=_genome(),
              o2=lambda x, y: 20.0 + 0.05 * x + 0 * y)
    s.link(0, 1)
    step_worker_motility(s, s.genome, 0.1, np.random.default_rng(3))
    assert s.pos[0, 0] == pytest.approx(-0.2)


def test_motility_shuts_down_in_flat_field():
    s = world([(WORKER, 0, 0), (CARGO, 15, 0)], genome=_genome())
    s.link(0, 1)  # attached: guided by the (uniform) oxygen field
    step_worker_motility(s, s.genome, 0.1, np.random.default_rng(4))
    assert s.pos[0, 0] == 0.0 and s.pos[0, 1] == 0.0


def test_persistence_keeps_direction_until_clock_expires():
    g = _genome(unattached_migration_bias=0.0, worker_persistence_time=1.0)
    s = world([(WORKER, 0, 0), (CARGO, 60, 0)], genome=g)
    rng = np.random.default_rng(5)
    step_worker_motility(s, g, 0.1, rng)
    first = s.direction[0].copy()
    for _ in range(9):
        step_worker_motility(s, g, 0.1, rng)
        np.testing.assert_array_equal(s.direction[0], first)
    step_worker_motility(s, g, 0.1, rng)
    assert not np.array_equal(s.direction[0], first)


def test_dead_workers_do_not_move():
    s = world([(WORKER, 0, 0), (CARGO, 50, 0)], genome=_genome())
    s.alive[0] = False
    step_worker_motility(s, s.genome, 0.1, np.random.default_rng(6))
    assert s.pos[0, 0] == 0.0
