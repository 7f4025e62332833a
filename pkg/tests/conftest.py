import math

import numpy as np
import pytest

from qrbackward.spectral import Grid1D, Interval


@pytest.fixture
def unit_grid():
    """The experiment grid: M = 15 on (0, pi)."""
    return Grid1D(Interval(0.0, math.pi), 15)


@pytest.fixture
def fine_grid():
    return Grid1D(Interval(0.0, math.pi), 200)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
