import numpy as np
import pytest

from globalrv.pathdata import SampledPath


def path_from_increments(increments, T=1.0, x0=0.0):
    d = np.asarray(increments, dtype=float)
    return SampledPath(np.concatenate(([x0], x0 + np.cumsum(d))), T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
