import pytest

from tpflow import Params

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small():
    """Reduced lattice for solver-level tests."""
    return Params(box_half_length=8.0, n_spatial=32, n_temporal=2)


@pytest.fixture(scope="session")
def tiny():
    return Params(box_half_length=4.0, n_spatial=16, n_temporal=2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
