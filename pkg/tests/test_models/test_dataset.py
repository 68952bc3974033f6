"""Dataset tests"""

import numpy as np
import pytest

from core.errors import DataError
from models.dataset import Dataset, concat_datasets
from models.feature_model import RbmModel
from tests.factories import DatasetFactory


def test_dataset_needs_cases():
    """Test that an empty dataset is rejected."""
    with pytest.raises(DataError):
        Dataset(cases=np.zeros((0, 3)))


def test_labels_must_align():
    """Test that labels need one entry per case."""
    with pytest.raises(DataError):
        Dataset(cases=np.ones((3, 2)), labels=np.array([0, 1]))


def test_factory_builds_spin_data():
    """Test the dataset factory."""
    ds = DatasetFactory(num_cases=5, dim=3)

    assert ds.num_cases == 5
    assert ds.dim == 3
    assert ds.is_spin()


def test_check_model_dimension():
    """Test that the case dimension must match the model."""
    ds = DatasetFactory(dim=4)
    with pytest.raises(DataError):
        ds.check_model(RbmModel(D=5, K=1))


def test_rbm_rejects_binary_values():
    """Test that RBM data must be spins, never 0/1."""
    ds = Dataset(cases=np.array([[0, 1], [1, 1]]))
    with pytest.raises(DataError):
        ds.visibles_for(RbmModel(D=2, K=1))


def test_visibles_for_enumerated(one_spin_model):
    """Test that enumerated models receive visible indices."""
    ds = Dataset(cases=np.array([[1], [1], [-1]]))

    np.testing.assert_array_equal(ds.visibles_for(one_spin_model), [1, 1, 0])


def test_for_class():
    """Test selecting the cases of one class."""
    ds = Dataset(cases=np.array([[1, 1], [-1, 1], [1, -1]]), labels=np.array([2, 0, 2]))
    cls = ds.for_class(2)

    np.testing.assert_array_equal(cls.cases, [[1, 1], [1, -1]])
    np.testing.assert_array_equal(cls.labels, [2, 2])
    with pytest.raises(DataError):
        ds.for_class(1)


def test_concat_keeps_order_and_labels():
    """Test stacking labelled datasets."""
    a = Dataset(cases=np.array([[1]]), labels=np.array([0]))
    b = Dataset(cases=np.array([[-1], [1]]), labels=np.array([1, 1]))
    both = concat_datasets([a, b])

    np.testing.assert_array_equal(both.cases, [[1], [-1], [1]])
    np.testing.assert_array_equal(both.labels, [0, 1, 1])
