import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from certopt.data import Dataset, generate_dataset
from certopt.problems import registry_lookup

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["binh_korn", "zdt3", "dtlz2"])
def problem(request):
    return registry_lookup(request.param)


@pytest.fixture(scope="session")
def bk_dataset():
    return generate_dataset(registry_lookup("binh_korn"), 1000, 7)


@pytest.fixture
def line_dataset():
    """y = 2x + 1 on [0, 1]: a target any network can fit."""
    x = np.linspace(0.0, 1.0, 200)[:, None]
    return Dataset(x, 2.0 * x[:, 0] + 1.0, ["x1"], ["f1"], np.array([[0.0, 1.0]]))
