import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).resolve().parents[1]
WALKS = ROOT / "demos" / "walks"


@pytest.fixture(scope="session")
def linear_bound_doc():
    return json.loads((DATA / "linear_walk_bound.json").read_text())


ACCEPTANCE_LINES = []
"""``PASS``/``FAIL`` lines collected by the acceptance suite."""


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
