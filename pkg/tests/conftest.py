import math
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from wavereg import ManifoldModel, flagship_process

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def circle():
    return ManifoldModel.circle(8)


@pytest.fixture(scope="session")
def torus():
    return ManifoldModel.torus((2 * math.pi, 2 * math.pi), 8)


@pytest.fixture(scope="session")
def flagship(circle):
    return flagship_process(circle)


@pytest.fixture(scope="session")
def flagship_torus(torus):
    return flagship_process(torus)
