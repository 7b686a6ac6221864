import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each; the lines are repeated in the terminal summary
_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    def record(text):
        _ACCEPTANCE_LINES.append(text)
        print(text)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
