import numpy as np
import pytest
from hypothesis import settings

from mapc.radar_model import RadarConfig
from mapc.stretch import build_compensation_matrix

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def automotive():
    return RadarConfig()


@pytest.fixture(scope="session")
def bank(automotive):
    return build_compensation_matrix(automotive)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
