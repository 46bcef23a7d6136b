import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from samplets import PointSet

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE = []


def random_points(rng, n, d):
    """Distinct random sites in [0, 1]^d with random values."""
    return PointSet(rng.random((n, d)), rng.standard_normal(n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
