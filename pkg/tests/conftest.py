import numpy as np
import pytest

from projlab.engine import run_alternating
from projlab.sets import coordinate_axis, epigraph_quadratic_set

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def parabola_gap_trace():
    return run_alternating(coordinate_axis(), epigraph_quadratic_set(1.0, 1.0), [1.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
