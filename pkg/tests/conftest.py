import numpy as np
import pytest

from teleograsp import planar_2r, spatial_6r

import helpers


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if helpers.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in helpers.ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def planar():
    return planar_2r()


@pytest.fixture(scope="session")
def spatial():
    return spatial_6r()


@pytest.fixture
def rng():
    return np.random.RandomState(1234)
