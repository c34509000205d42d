import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from novabot.sim import step_mechanics

from helpers import CARGO, TUMOR, WORKER, world


def test_far_apart_agents_are_stationary():
    s = world([(TUMOR, -50, 0), (TUMOR, 50, 0)])
    before = s.pos.copy()
    step_mechanics(s, 0.1)
    np.testing.assert_array_equal(s.pos, before)


def test_overlapping_pair_moves_equal_and_opposite():
    s = world([(TUMOR, -3, 1), (TUMOR, 4, -2)])
    before = s.pos.copy()
    step_mechanics(s, 0.1)
    d = s.pos - before
    np.testing.assert_allclose(d[0], -d[1], atol=1e-15)
    # pushed apart along the line of centers
    assert np.linalg.norm(s.pos[0] - s.pos[1]) > np.linalg.norm(before[0] - before[1])


def test_adhesion_pulls_near_neighbours_together():
    # 18 µm apart: no overlap (r sum 16.8) but inside 1.25 x 16.8 = 21 µm
    s = world([(TUMOR, -9, 0), (TUMOR, 9, 0)])
    step_mechanics(s, 0.1)
    assert s.pos[1, 0] - s.pos[0, 0] < 18.0


def test_long_link_breaks():
    s = world([(WORKER, 0, 0), (CARGO, 60, 0)])
    s.link(0, 1)
    step_mechanics(s, 0.1)
    assert s.attached[0] == -1 and s.attached[1] == -1
    assert s.events["links_broken"] == 1


def test_spring_pulls_attached_pair():
    s = world([(WORKER, 0, 0), (CARGO, 30, 0)])
    s.link(0, 1)
    step_mechanics(s, 0.1)
    # elastic 0.05/min x 30 µm x 0.1 min = 0.15 µm each way
    assert s.pos[0, 0] == pytest.approx(0.15)
    assert s.pos[1, 0] == pytest.approx(29.85)
    assert s.attached[0] == 1


def test_dead_agents_do_not_move():
    s = world([(TUMOR, -3, 0), (TUMOR, 3, 0)])
    s.alive[1] = False
    step_mechanics(s, 0.1)
    assert s.pos[1, 0] == 3.0
    assert s.pos[0, 0] == -3.0   # the dead cell exerts no force either


def test_positions_clamped_to_domain():
    s = world([(TUMOR, 99.0, 0), (TUMOR, 99.5, 0)], half_width=100.0)
    for _ in range(50):
        step_mechanics(s, 0.1)
    assert np.all(np.abs(s.pos) <= 100.0 - s.radius[:, None] + 1e-12)


def test_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step_mechanics(world([(TUMOR, 0, 0)]), 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 40))
def test_pair_forces_conserve_momentum(seed, n):
    r = np.random.default_rng(seed)
    kinds = r.choice([TUMOR, WORKER, CARGO], size=n)
    pts = r.uniform(-30, 30, size=(n, 2))
    s = world([(int(k), x, y) for k, (x, y) in zip(kinds, pts)], half_width=1000.0)
    before = s.pos.copy()
    step_mechanics(s, 0.1)
    # no clamping can occur in a 2 mm box, so total displacement is zero
    np.testing.assert_allclose((s.pos - before).sum(axis=0), 0.0, atol=1e-9)
