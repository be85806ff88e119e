import pytest

from visclimit.gas import GasParams, State
from visclimit.profiles import build_profile_set
from visclimit.riemann import solve_pattern

# reference data set used across modules: total strength about 0.19
LEFT = State(1.0, 0.0, 1.0)
RIGHT = State(1.1, 0.15, 1.05)


@pytest.fixture(scope="session")
def gas():
    return GasParams(5.0 / 3.0, 1.0)


@pytest.fixture(scope="session")
def pattern(gas):
    return solve_pattern(gas, LEFT, RIGHT)


@pytest.fixture(scope="session")
def profile_set(pattern):
    return build_profile_set(pattern, 1.0)


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one pass/fail line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
