import math

import pytest

from taunav.geometry import CameraModel, CorridorWorld


@pytest.fixture
def cam():
    return CameraModel(f=1.0, delta=1.0, epsilon=1.0)


@pytest.fixture
def world():
    return CorridorWorld(1.0)


def admissible_grid(n_x=9, n_th=9, R=1.0, f=1.0, margin=0.02):
    bound = math.pi / 2 - math.atan(f) - margin
    for i in range(n_x):
        x = -0.95 * R + 1.9 * R * i / (n_x - 1)
        for j in range(n_th):
            dth = -0.99 * bound + 1.98 * bound * j / (n_th - 1)
            yield x, math.pi / 2 + dth


ACCEPTANCE_RESULTS = []


def record_criterion(number, title, ok, detail=""):
    """Log one acceptance line; the test then asserts ``ok``."""
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
