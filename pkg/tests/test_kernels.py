import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from novabot import _pykernels, kernels

compiled = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.backends()


def test_env_var_forces_python_fallback():
    code = "from novabot import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, NOVABOT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


def _cloud(seed, n, hw=100.0):
    r = np.random.default_rng(seed)
    pos = np.ascontiguousarray(r.uniform(-hw, hw, size=(n, 2)))
    radius = r.uniform(2.0, 9.0, size=n)
    rep = r.uniform(0.0, 10.0, size=n)
    adh = r.uniform(0.0, 2.0, size=n)
    active = (r.random(n) < 0.9).astype(np.uint8)
    return pos, radius, rep, adh, active


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(0, 300))
def test_pair_velocities_backends_agree(seed, n):
    pos, radius, rep, adh, active = _cloud(seed, n)
    a = compiled.pair_velocities(pos, radius, rep, adh, active, 1.25, 100.0)
    b = _pykernels.pair_velocities(pos, radius, rep, adh, active, 1.25, 100.0)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


@needs_compiled
def test_pair_velocities_coincident_points():
    pos = np.zeros((2, 2))
    args = (np.array([4.0, 4.0]), np.ones(2), np.zeros(2), np.ones(2, np.uint8), 1.25, 50.0)
    a = compiled.pair_velocities(pos, *args)
    b = _pykernels.pair_velocities(pos, *args)
    np.testing.assert_allclose(a, b)
    assert a[0, 0] > 0 and a[1, 0] < 0


@needs_compiled
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), nsteps=st.integers(0, 7), decay=st.floats(0, 1))
def test_diffuse_backends_agree(seed, nsteps, decay):
    r = np.random.default_rng(seed)
    g0 = r.uniform(0, 38, size=(9, 11))
    up = r.uniform(0, 50, size=(9, 11))
    a, b = g0.copy(), g0.copy()
    compiled.diffuse(a, up, 1e5, decay, 20.0, 0.0008, nsteps, 38.0)
    _pykernels.diffuse(b, up, 1e5, decay, 20.0, 0.0008, nsteps, 38.0)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@needs_compiled
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(0, 200))
def test_deposit_backends_agree(seed, n):
    r = np.random.default_rng(seed)
    pos = np.ascontiguousarray(r.uniform(-320, 320, size=(n, 2)))
    w = r.uniform(0, 5, size=n)
    mask = (r.random(n) < 0.7).astype(np.uint8)
    a = compiled.deposit_nearest(pos, w, mask, -300.0, 20.0, 31, 31)
    b = _pykernels.deposit_nearest(pos, w, mask, -300.0, 20.0, 31, 31)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    assert a.sum() == pytest.approx(w[mask.astype(bool)].sum())


def test_python_fallback_simulation_matches_compiled(seed_snapshot):
    """One short treatment run under each backend gives the same outcome."""
    code = (
        "from novabot.sim import grow_tumor, run_treatment, SimConfig, FAST_PROFILE\n"
        "from novabot.sim.params import HAND_TUNED_GENOME\n"
        "cfg = SimConfig(**FAST_PROFILE)\n"
        "snap = grow_tumor(3, 0.0, cfg)\n"
        "o = run_treatment(snap, HAND_TUNED_GENOME, 5, days=0.02, config=cfg)\n"
        "print(o.rcc, repr(o.behavior[0]), repr(o.behavior[1]))\n"
    )
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, NOVABOT_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        outs.append(res.stdout.split())
    assert outs[0][0] == outs[1][0]
    for a, b in zip(outs[0][1:], outs[1][1:]):
        assert float(a) == pytest.approx(float(b), abs=1e-6)
