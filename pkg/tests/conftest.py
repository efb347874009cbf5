import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def cases_csv_path():
    """Daily-cases CSV for the published-number checks, if the user supplied one."""
    env = os.environ.get("GARMATS_CASES_CSV")
    if env:
        return Path(env)
    default = Path(__file__).parent / "data" / "indonesia_daily_cases.csv"
    return default if default.is_file() else None
