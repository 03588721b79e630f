import numpy as np
import pytest

from dcecsim import CacheConfig, SystemParams, validate, zipf_popularity


@pytest.fixture(scope="session")
def default_params():
    return validate(SystemParams())


@pytest.fixture(scope="session")
def catalog56():
    return zipf_popularity(2000, 0.56)


@pytest.fixture(scope="session")
def cache_k4():
    return CacheConfig(150, 200, 4)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
