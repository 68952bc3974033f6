"""1-nearest-neighbour baseline with Manhattan distance."""

import numpy as np
from numpy.typing import NDArray

from core.errors import DataError


def _as_features(values: NDArray) -> NDArray:
    # Widen narrow integers so differences cannot wrap; real features stay real.
    arr = np.asarray(values)
    return arr.astype(np.promote_types(arr.dtype, np.int64), copy=False)


def manhattan_distances(train: NDArray, query: NDArray) -> NDArray:
    """L1 distance from one query to every training case."""
    return np.abs(_as_features(train) - _as_features(query)).sum(axis=1)


def knn1_manhattan(train: NDArray, train_labels: NDArray, query: NDArray) -> int:
    """Label of the L1-nearest training case; ties go to the lowest index."""
    train = np.atleast_2d(_as_features(train))
    if train.shape[0] == 0:
        raise DataError("1NN needs a non-empty training set")
    dist = manhattan_distances(train, query)
    return int(np.asarray(train_labels)[int(np.argmin(dist))])


def knn1_predict(
    train: NDArray,
    train_labels: NDArray,
    queries: NDArray,
    block: int = 256,
) -> NDArray[np.int64]:
    """Vectorized 1NN over many queries, processed in blocks."""
    train = np.atleast_2d(_as_features(train))
    if train.shape[0] == 0:
        raise DataError("1NN needs a non-empty training set")
    queries = np.atleast_2d(_as_features(queries))
    labels = np.asarray(train_labels)
    out = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], block):
        q = queries[start : start + block]
        dist = np.abs(q[:, None, :] - train[None, :, :]).sum(axis=2)
        out[start : start + block] = labels[np.argmin(dist, axis=1)]
    return out
