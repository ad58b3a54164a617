import pytest

from breakthrough_timing import Problem, ValueSurface, find_endpoint

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def problem():
    return Problem.gbm_linear()


@pytest.fixture(scope="session")
def boundary(problem):
    return find_endpoint(problem)


@pytest.fixture(scope="session")
def surface(problem, boundary):
    return ValueSurface(problem, boundary)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
