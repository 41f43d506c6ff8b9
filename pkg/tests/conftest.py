import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qtsp.core import CostModel, Instance  # noqa: E402

# Lens insertion walkthrough: path 1-2-3-4 with free vertices 5 and 6 (0-based here).
WALK_POINTS = [(0, 3), (2, 1.5), (8, 1.5), (10, 0), (3.5, 1.9), (5, 1.7)]
# Eleven-point tour whose edge {1, 2} has vertex 8 in its 30 degree lens.
TOUR_POINTS = [(0.333333, 0.8), (0.333333, 0.2), (0.666666, 0.111111), (0.88, 0.211111), (1.0, 1.0),
        (0.1, 0.9), (0.0, 0.5), (0.3, 0.55), (0.888889, 0.5), (0.8, 0.888889), (0.666666, 0.888889)]

RAW_ANGLE = CostModel.angle(scale=1.0)

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


@pytest.fixture
def walk():
    return Instance(WALK_POINTS, RAW_ANGLE)


@pytest.fixture
def tour11():
    return Instance(TOUR_POINTS, RAW_ANGLE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
