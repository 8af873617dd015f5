import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ecocorridor.corridor import RouteSpec, SignalSpec, SubSegment

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fig5_route():
    """Peachtree geometry: five signals and an end stop sign."""
    sigs = tuple(SignalSpec(p, 95.0, 30.0) for p in (170.0, 460.0, 620.0, 780.0, 1020.0))
    return RouteSpec(1500.0, (SubSegment(1500.0, 17.8),), sigs, end_stop=1420.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion and assert it."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
