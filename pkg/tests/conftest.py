import numpy as np
import pytest

from plasmonwire import WireSystem

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    """Log one acceptance line; printed again in the terminal summary."""
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def thin_wire():
    return WireSystem(0.01, complex(-75, 0.6))


@pytest.fixture(scope="session")
def lossless_thin_wire():
    return WireSystem(0.01, -75.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
