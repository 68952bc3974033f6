"""Pytest configuration and fixtures"""

import os

import numpy as np
import pytest

from core.config import get_settings
from models.dataset import Dataset
from models.feature_model import EnumeratedModel, RbmModel
from services.synthetic import prototype_spin_cases, random_spin_cases


def pytest_collection_modifyitems(config, items):
    run_slow = os.getenv("RUN_SLOW_TESTS") == "1"
    slow_skip = pytest.mark.skip(reason="RUN_SLOW_TESTS not set")

    for item in items:
        if "slow" in item.keywords and not run_slow:
            item.add_marker(slow_skip)


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """Settings are cached per process; tests that patch the environment need a fresh copy"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    """Seeded generator for property checks"""
    return np.random.default_rng(get_settings().sample_seed)


@pytest.fixture
def one_spin_model():
    """Fully observed single spin with feature g(x) = x"""
    return EnumeratedModel(
        visible_states=np.array([[-1], [1]]),
        hidden_states=np.zeros((1, 0)),
        feature_matrix=np.array([[-1.0], [1.0]]),
    )


@pytest.fixture
def one_spin_data():
    """Both spin values observed once, so the data moment is zero"""
    return Dataset(cases=np.array([[1], [-1]]))


@pytest.fixture
def xz_model():
    """One visible and one hidden spin with the single feature x * z"""
    states = np.array([[-1], [1]])
    features = np.array([[x * z] for x in (-1, 1) for z in (-1, 1)], dtype=np.float64)
    return EnumeratedModel(visible_states=states, hidden_states=states, feature_matrix=features)


@pytest.fixture
def xz_data():
    return Dataset(cases=np.array([[1]]))


@pytest.fixture
def table_model():
    """Random enumerated table with 4 visible, 3 hidden states and 3 features"""
    gen = np.random.default_rng(7)
    return EnumeratedModel(
        visible_states=np.arange(4)[:, None],
        hidden_states=np.arange(3)[:, None],
        feature_matrix=gen.normal(size=(12, 3)),
    )


@pytest.fixture
def table_data():
    return Dataset(cases=np.array([[0], [1], [3], [1]]))


@pytest.fixture
def small_rbm():
    return RbmModel(D=6, K=3)


@pytest.fixture
def small_rbm_data():
    return prototype_spin_cases(12, 6, num_prototypes=3, flip_prob=0.15, seed=11)


@pytest.fixture
def rbm_16x8():
    return RbmModel(D=16, K=8)


@pytest.fixture
def rbm_16x8_data():
    """64 distinct uniform spin cases"""
    data = random_spin_cases(64, 16, seed=3)
    assert len({row.tobytes() for row in data.cases}) == data.num_cases
    return data
