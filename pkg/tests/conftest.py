import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from flipcenter.triangulation import PointSet, build, edge  # noqa: E402

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
PENTAGON = [(0, 0), (4, 0), (6, 3), (2, 6), (-2, 3)]
PENTAGON_HULL = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]


def pentagon_fan(k: int):
    return build(PENTAGON, PENTAGON_HULL + [edge(k, (k + 2) % 5), edge(k, (k + 3) % 5)])


def square(diagonal):
    return build(SQUARE, [(0, 1), (1, 2), (2, 3), (0, 3), diagonal])


def random_pointset(rng: np.random.Generator, n: int, span: int = 1000) -> PointSet:
    """n distinct uniform integer points that are not all collinear."""
    while True:
        pts = set()
        while len(pts) < n:
            pts.add((int(rng.integers(0, span)), int(rng.integers(0, span))))
        try:
            return PointSet(sorted(pts))
        except ValueError:
            continue


def convex_pointset(rng: np.random.Generator, n: int) -> PointSet:
    """Points on the parabola y = x^2 at distinct integer x: convex position."""
    xs = sorted(rng.choice(np.arange(-4 * n, 4 * n), size=n, replace=False).tolist())
    return PointSet([(x, x * x) for x in xs])


@pytest.fixture
def fans():
    return [pentagon_fan(k) for k in range(5)]


# one summary line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
