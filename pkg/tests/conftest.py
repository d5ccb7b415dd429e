import numpy as np
import pytest

from qso.generators import constant_operator, identity_volterra, swap_operator, volterra_from_skew

ACCEPTANCE_LINES = []


@pytest.fixture
def identity2():
    return identity_volterra(2)


@pytest.fixture
def volterra_a12():
    """d=2 Volterra with a[0, 1] = 1: P[0,0,0] = P[0,1,0] = P[1,1,1] = 1."""
    return volterra_from_skew(np.array([[0.0, 1.0], [-1.0, 0.0]]))


@pytest.fixture
def swap():
    return swap_operator()


@pytest.fixture
def constant3():
    return constant_operator([0.2, 0.3, 0.5])


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line for an acceptance criterion."""

    def record(label, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
