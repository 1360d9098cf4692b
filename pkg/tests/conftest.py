import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uzawa_afem.mesh import initial_mesh, refine_conforming

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def square():
    return initial_mesh("unit_square")


@pytest.fixture
def lshape():
    return initial_mesh("l_shape")


def random_refinement(T, rng, steps, max_marks=3):
    for _ in range(steps):
        k = int(rng.integers(1, max_marks + 1))
        T = refine_conforming(T, rng.choice(T.leaves, size=min(k, len(T)), replace=False))
    return T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# lines collected by the acceptance suite, echoed after the test summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
