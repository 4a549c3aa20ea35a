import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from opo_wigner import OpoParams, QuarticConvention, normalize

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def field(mu, g2=0.01, conv="appendixB"):
    """Normalized fields are reused across tests; normalization is the slow step."""
    return normalize(OpoParams(mu, g2), QuarticConvention.parse(conv))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
