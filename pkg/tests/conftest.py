import numpy as np
import pytest

from contactkit.bundle import make_shape, synthesize
from contactkit.geometry import sphere


@pytest.fixture(scope="session")
def unit_sphere():
    return sphere(1.0)


@pytest.fixture(scope="session")
def shapes():
    return {name: make_shape(name) for name in ("sphere", "cube", "torus", "dumbbell")}


@pytest.fixture(scope="session")
def sphere_scene():
    return synthesize("sphere", 64, seed=0)


@pytest.fixture(scope="session")
def dumbbell_scene():
    return synthesize("dumbbell", 64, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
