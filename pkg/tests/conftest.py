import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reference_values import MEN, WOMEN  # noqa: E402


@pytest.fixture
def men():
    return np.array(MEN)


@pytest.fixture
def women():
    return np.array(WOMEN)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def diag_table():
    return np.array([[0.4, 0.1], [0.1, 0.4]])


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import summary_lines

    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
