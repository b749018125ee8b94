import numpy as np
import pytest

from cvxpmf.experiments import catalog

_ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(number, passed, detail=""):
        _ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pmfs():
    return {k: catalog(k) for k in ("p0", "p1", "p2", "p3", "p4", "p5")}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
