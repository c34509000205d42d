import math

import numpy as np
import pytest

from novabot.errors import SimulationError
from novabot.sim import (
    HAND_TUNED_GENOME,
    Kind,
    RngStreams,
    SimConfig,
    TreatmentParams,
    center_of_gravity,
    grow_tumor,
    inject_treatment,
    run_treatment,
)
from novabot.sim.engine import _integrate, grow_tumor_with_log, hex_disc, world_from_snapshot
from novabot.sim.snapshot import TumorSnapshot

from oracles import hex_count_by_area


def test_hex_disc_count_matches_area_ratio():
    pts = hex_disc(200.0, 8.4)
    expected = hex_count_by_area(200.0, 8.4)
    ring = 2 * math.pi * 200.0 / 16.8           # cells in one outer ring
    assert abs(len(pts) - expected) <= ring
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() == pytest.approx(16.8)
    assert np.all(np.linalg.norm(pts, axis=1) <= 200.0)


def test_grow_zero_days_returns_initial_disc():
    snap = grow_tumor(7, 0.0)
    assert snap.count == len(hex_disc(200.0, 8.4))
    assert np.all(snap.radii == 8.4)
    assert snap.rng_seed_of_growth == 7


def test_growth_is_deterministic(fast_config, fast_snapshot):
    again = grow_tumor(7, 1.0, fast_config)
    assert again.to_text() == fast_snapshot.to_text()


def test_fast_profile_tumor_fits_with_injection_band(fast_snapshot, fast_config):
    r = np.linalg.norm(fast_snapshot.positions, axis=1) + fast_snapshot.radii
    assert r.max() + fast_config.injection_inner_gap < fast_config.half_width
    assert fast_snapshot.count > len(hex_disc(fast_config.initial_tumor_radius, 8.4))


def test_negative_days_rejected():
    with pytest.raises(ValueError):
        grow_tumor(1, -1.0)
    with pytest.raises(ValueError):
        run_treatment(grow_tumor(1, 0.0, SimConfig(half_width=300.0)), HAND_TUNED_GENOME, 1,
                      days=0.0)


@pytest.mark.slow
def test_seven_day_growth_in_default_domain():
    snap, events = grow_tumor_with_log(7, 7.0)
    initial = grow_tumor(7, 0.0)
    assert snap.count > initial.count
    assert events["births"] > events["necrosis_deaths"]
    assert snap.count == initial.count + events["births"] - events["necrosis_deaths"]
    w = world_from_snapshot(snap)
    assert w.oxygen.sample([[0.0, 0.0]])[0] < 10.0   # hypoxic core
    again = grow_tumor(7, 7.0)
    assert again.to_text() == snap.to_text()


def test_inject_counts_and_band(seed_snapshot, fast_config):
    w = world_from_snapshot(seed_snapshot, fast_config)
    tumor_reach = (np.linalg.norm(w.pos, axis=1) + w.radius).max()
    inject_treatment(w, HAND_TUNED_GENOME, 4)
    workers, cargo = w.ids(Kind.WORKER), w.ids(Kind.CARGO)
    assert workers.size == 50 and cargo.size == 100
    assert np.all(w.attached[workers] == -1) and np.all(w.alive[workers])
    center = w.pos[w.ids(Kind.TUMOR)].mean(axis=0)
    r = np.linalg.norm(w.pos[np.r_[workers, cargo]] - center, axis=1)
    assert r.min() >= tumor_reach + 20.0 - 1e-9
    assert r.max() <= tumor_reach + 120.0 + 1e-9


def test_inject_is_deterministic(seed_snapshot, fast_config):
    a = inject_treatment(world_from_snapshot(seed_snapshot, fast_config), HAND_TUNED_GENOME, 4)
    b = inject_treatment(world_from_snapshot(seed_snapshot, fast_config), HAND_TUNED_GENOME, 4)
    np.testing.assert_array_equal(a.pos, b.pos)


def test_empty_injection_only_resets_clock(seed_snapshot, fast_config):
    w = world_from_snapshot(seed_snapshot, fast_config)
    w.time = 55.0
    before = w.pos.copy()
    inject_treatment(w, HAND_TUNED_GENOME, 4, n_workers=0, n_cargo=0)
    assert w.time == 0.0 and w.n == len(before)
    np.testing.assert_array_equal(w.pos, before)


def test_inject_requires_tumor_only_state(seed_snapshot, fast_config):
    w = inject_treatment(world_from_snapshot(seed_snapshot, fast_config), HAND_TUNED_GENOME, 1)
    with pytest.raises(SimulationError):
        inject_treatment(w, HAND_TUNED_GENOME, 1)


def test_world_from_empty_snapshot_fails():
    snap = TumorSnapshot(1, 100.0, 0, np.zeros((0, 2)), np.zeros(0), np.full((11, 11), 38.0),
                         20.0)
    with pytest.raises(SimulationError):
        world_from_snapshot(snap)


def test_run_treatment_is_deterministic(seed_snapshot, fast_config):
    a = run_treatment(seed_snapshot, HAND_TUNED_GENOME, 11, days=0.05, config=fast_config)
    b = run_treatment(seed_snapshot, HAND_TUNED_GENOME, 11, days=0.05, config=fast_config)
    assert a == b
    assert a.elapsed_sim_time == pytest.approx(72.0)
    hw = fast_config.half_width
    assert abs(a.behavior[0]) <= hw and abs(a.behavior[1]) <= hw
    assert not a.workers_extinct


def test_no_agents_equals_untreated_control(seed_snapshot, fast_config):
    cfg = fast_config.replace(n_workers=0, n_cargo=0)
    out = run_treatment(seed_snapshot, HAND_TUNED_GENOME, 8, days=0.3, config=cfg)
    w = world_from_snapshot(seed_snapshot, cfg)
    _integrate(w, 0.3 * 1440, RngStreams.from_seed(8), genome=None, divide=False)
    assert out.rcc == w.count(Kind.TUMOR)
    assert out.workers_extinct and out.behavior == (0.0, 0.0)


def test_worker_extinction_is_flagged(seed_snapshot, fast_config):
    p = TreatmentParams(worker_apoptosis_rate=5.0)
    out = run_treatment(seed_snapshot, HAND_TUNED_GENOME, 1, days=0.01, config=fast_config,
                        params=p)
    assert out.workers_extinct and out.behavior == (0.0, 0.0)


@pytest.mark.parametrize("divide", [False, True])
def test_identity_ledger_balances(seed_snapshot, fast_config, divide):
    cfg = fast_config.replace(division_during_treatment=divide)
    p = TreatmentParams(drug_death_rate=0.5)   # make drug deaths plentiful
    out = run_treatment(seed_snapshot, HAND_TUNED_GENOME, 2, days=0.25, config=cfg, params=p)
    ev = out.events
    births = ev["births"] if divide else 0
    if not divide:
        assert ev["births"] == 0
    assert out.rcc + ev["drug_deaths"] + ev["necrosis_deaths"] == seed_snapshot.count + births


def test_links_stay_mutual_every_step(seed_snapshot, fast_config):
    from novabot.sim.world import (
        step_attachment_and_release, step_drug_and_death, step_mechanics, step_worker_motility)

    w = world_from_snapshot(seed_snapshot, fast_config)
    streams = RngStreams.from_seed(5)
    inject_treatment(w, HAND_TUNED_GENOME, streams.injection)
    g = HAND_TUNED_GENOME
    for step in range(600):
        step_mechanics(w, 0.1)
        step_worker_motility(w, g, 0.1, streams.motility)
        step_attachment_and_release(w, g, 0.1, streams.motility)
        if step % 60 == 59:
            step_drug_and_death(w, w.params, 6.0, streams)
        w.check_links()
    assert w.events["attachments"] > 0


def test_center_of_gravity_examples():
    assert center_of_gravity([(5, 5)]) == (5.0, 5.0)
    assert center_of_gravity([(0, 0), (10, 0)]) == (5.0, 0.0)
    assert center_of_gravity([]) == (0.0, 0.0)


def test_center_of_gravity_matches_summation():
    pts = np.random.default_rng(0).uniform(-500, 500, size=(100, 2))
    sx = sum(float(p[0]) for p in pts) / 100
    sy = sum(float(p[1]) for p in pts) / 100
    cx, cy = center_of_gravity(pts)
    assert cx == pytest.approx(sx, abs=1e-9) and cy == pytest.approx(sy, abs=1e-9)
