import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from biconj.core import GridSpec, SampledFunction

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def grid1(lo=-2.0, hi=2.0, n=41):
    return GridSpec.regular((lo, hi, n))


def grid2(lo=-2.0, hi=2.0, n=21):
    return GridSpec.regular((lo, hi, n), (lo, hi, n))


def fn(grid, values):
    return SampledFunction(grid, np.asarray(values, dtype=float))


def close(a, b, rtol):
    """Elementwise ``|a - b| <= rtol * (1 + |b|)``, with inf matching inf."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    same_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    with np.errstate(invalid="ignore"):
        ok = np.abs(a - b) <= rtol * (1 + np.abs(b))
    return bool(np.all(same_inf | ok))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
