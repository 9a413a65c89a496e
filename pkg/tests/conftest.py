import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from affinecert import SwitchedAffineSystem

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def half_identity():
    return SwitchedAffineSystem.from_modes([(0.5 * np.eye(2), [0.0, 0.0])])


@pytest.fixture
def shifted_half():
    return SwitchedAffineSystem.from_modes([(0.5 * np.eye(2), [1.0, 0.0])])
