import numpy as np
import pytest

from layerbounds import sim
from layerbounds.responseset import TABLE1


@pytest.fixture(scope="session")
def design_data():
    """Population conditional laws for both designs, built once."""
    return {k: sim.population_data(sim.design(k)) for k in (1, 2)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def table1():
    return TABLE1


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
