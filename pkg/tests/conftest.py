import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vqembed.models import erdos_renyi

settings.register_profile("ci", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_graph():
    return erdos_renyi(6, 0.5, 1)


def pytest_terminal_summary(terminalreporter):
    from .helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
