import numpy as np
import pytest

from novabot.sim import FAST_PROFILE, SimConfig, grow_tumor
from novabot.sim.engine import initial_world


@pytest.fixture(scope="session")
def fast_config():
    return SimConfig(**FAST_PROFILE)


@pytest.fixture(scope="session")
def fast_snapshot(fast_config):
    """The CI tumor: fast profile grown for one day."""
    return grow_tumor(7, 1.0, fast_config)


@pytest.fixture(scope="session")
def seed_snapshot(fast_config):
    """Ungrown disc in the fast domain (cheap, for short treatment runs)."""
    return grow_tumor(3, 0.0, fast_config)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_world(fast_config):
    return initial_world(fast_config)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
