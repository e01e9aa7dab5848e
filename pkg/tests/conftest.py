import os
from pathlib import Path

import numpy as np
import pytest

REPO = Path(__file__).resolve().parents[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def data_dir():
    d = Path(os.environ.get("MMSG_DATA_DIR", REPO / "data"))
    if not d.is_dir():
        pytest.skip(f"dataset directory {d} not found (run scripts/prepare_data.py)")
    return d


# Acceptance criteria record their outcome here; the summary below prints one
# line per criterion at the end of the run.
ACCEPTANCE: dict = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        if number == 10:
            status = "REPORTED"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}")
