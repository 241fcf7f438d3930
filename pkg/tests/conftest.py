import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from supnorm_adapt.spline_kernel import projection_kernel

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def kernels():
    return {r: projection_kernel(r) for r in range(1, 5)}


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[num])
