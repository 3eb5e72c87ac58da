import numpy as np
import pytest

from spopo import model

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def spec():
    return model.realistic_spec()


@pytest.fixture(scope="session")
def default_run(spec):
    return model.simulate(spec)


@pytest.fixture(scope="session")
def six_db_run(spec):
    """Lossless state whose leading supermode is squeezed by 6 dB."""
    r = model.pump_ratio_for_squeezing(-6.0)
    return model.simulate(spec, model.SimulationSettings(pump_ratio=r, loss=0.0))
