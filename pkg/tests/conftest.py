import os

import pytest
from hypothesis import HealthCheck, settings

from micromaser import MaserParams

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def warm():
    """a = 1, n_b = 0.15, zero detuning, N = 100."""
    return MaserParams(a=1.0, n_b=0.15, Delta=0.0, theta=1.0, N=100)


@pytest.fixture
def cold():
    """Trapping regime: a = 1, n_b = 0, zero detuning, N = 100."""
    return MaserParams(a=1.0, n_b=0.0, Delta=0.0, theta=1.0, N=100)
