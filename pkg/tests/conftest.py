import numpy as np
import pytest

from codevo.model import PopulationModel, symmetric_sensor, well_mixed_structure

EPS = 0.01


def two_listener_model(opposite: bool) -> PopulationModel:
    """Agent 0 listens to agents 1 and 2 with equal probability; binary
    environment, all sensors binary symmetric with crossover 0.01."""
    identity = np.eye(2)
    codes = np.stack([identity, identity, identity[::-1] if opposite else identity])
    structure = np.zeros((3, 3))
    structure[0, 1] = structure[0, 2] = 0.5
    return PopulationModel.from_arrays([0.5, 0.5], symmetric_sensor(2, EPS).table, codes, structure)


def random_model(rng, n=None, m=None, ny=None, nx=None, shared_sensor=False, well_mixed=False):
    n = n or int(rng.integers(1, 5))
    m = m or int(rng.integers(1, 5))
    ny = ny or int(rng.integers(1, 4))
    nx = nx or int(rng.integers(1, 4))
    env = rng.dirichlet(np.ones(m))
    if shared_sensor:
        sensors = np.broadcast_to(rng.dirichlet(np.ones(ny), size=m), (n, m, ny))
    else:
        sensors = rng.dirichlet(np.ones(ny), size=(n, m))
    codes = rng.dirichlet(np.full(nx, 0.5), size=(n, ny))
    if well_mixed:
        structure = well_mixed_structure(n)
    else:
        structure = rng.dirichlet(np.ones(n * n)).reshape(n, n)
    return PopulationModel.from_arrays(env, sensors, codes, structure)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
