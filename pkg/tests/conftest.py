import os

import pytest
from hypothesis import HealthCheck, settings

from nsbandit import FiniteDist, ModulatedBernoulliSpec

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


@pytest.fixture
def coin():
    return FiniteDist.uniform([0.0, 1.0])


@pytest.fixture
def two_arm(coin):
    return ModulatedBernoulliSpec.homogeneous(2, coin, 0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
