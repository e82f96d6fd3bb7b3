import pytest

from multisecant import compute_periods, new_curve
from multisecant.config import default_config

# x(x-1)(x-2)(x-3)(x-4): genus 2 with real branch points
QUINTIC = [0, 24, -50, 35, -10, 1]
# x^3 - x: the lemniscatic elliptic curve
CUBIC = [0, -1, 0, 1]

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def curve2():
    return new_curve(QUINTIC)


@pytest.fixture(scope="session")
def periods2(curve2):
    return compute_periods(curve2, 256)


@pytest.fixture(scope="session")
def lemniscatic():
    c = new_curve(CUBIC)
    return c, compute_periods(c, 256)


@pytest.fixture(scope="session")
def cfg():
    return default_config()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
