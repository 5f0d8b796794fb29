import numpy as np
import pytest

from staircase.field import FieldContext

# acceptance criteria report one line each; collected here and printed at the end
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ctx():
    return FieldContext(65537)


@pytest.fixture
def gf5():
    return FieldContext(5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
