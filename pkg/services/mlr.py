"""Multinomial logistic regression trained by full-batch gradient descent."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import log_softmax, softmax

from core.errors import DataError


@dataclass(frozen=True, eq=False)
class MlrModel:
    """Softmax classifier.

    Attributes:
        weights: (C, F + 1) matrix, last column is the bias
        classes: Class label of each row
    """

    weights: NDArray[np.float64]
    classes: NDArray[np.int64]

    def decision_function(self, features: NDArray) -> NDArray[np.float64]:
        return _with_bias(features) @ self.weights.T

    def predict_proba(self, features: NDArray) -> NDArray[np.float64]:
        return softmax(self.decision_function(features), axis=1)

    def predict(self, features: NDArray) -> NDArray[np.int64]:
        return self.classes[np.argmax(self.decision_function(features), axis=1)]


def _with_bias(features: NDArray) -> NDArray[np.float64]:
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    return np.hstack([X, np.ones((X.shape[0], 1))])


def mlr_loss_and_grad(
    weights: NDArray,
    features: NDArray,
    targets: NDArray,
    reg: float,
) -> tuple[float, NDArray[np.float64]]:
    """
    L2-regularized softmax cross-entropy and its gradient.

    The bias column is not penalized.

    Args:
        weights: (C, F + 1) weight matrix
        features: (N, F) features
        targets: (N,) row indices into ``weights``
        reg: L2 coefficient

    Returns:
        (loss, gradient with the shape of ``weights``)
    """
    X = _with_bias(features)
    n = X.shape[0]
    logits = X @ weights.T
    log_p = log_softmax(logits, axis=1)
    rows = np.arange(n)
    penalized = weights[:, :-1]
    loss = -log_p[rows, targets].mean() + 0.5 * reg * float(np.sum(penalized**2))

    residual = np.exp(log_p)
    residual[rows, targets] -= 1.0
    grad = residual.T @ X / n
    grad[:, :-1] += reg * penalized
    return float(loss), grad


def mlr_train(
    features: NDArray,
    labels: NDArray,
    reg: float = 1e-4,
    iters: int = 500,
    lr: float = 0.1,
) -> MlrModel:
    """
    Fit a softmax classifier from zero initial weights.

    Args:
        features: (N, F) finite features
        labels: (N,) integer labels, at least two distinct values
        reg: L2 coefficient
        iters: Gradient steps
        lr: Learning rate

    Returns:
        Trained model
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if not np.isfinite(X).all():
        raise DataError("MLR features must be finite")
    classes, targets = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise DataError("MLR needs at least two classes")

    weights = np.zeros((classes.size, X.shape[1] + 1))
    for _ in range(iters):
        _, grad = mlr_loss_and_grad(weights, X, targets, reg)
        weights -= lr * grad
    return MlrModel(weights=weights, classes=classes)


def accuracy(predicted: NDArray, labels: NDArray) -> float:
    predicted = np.asarray(predicted)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape or labels.size == 0:
        raise DataError("predictions and labels must be non-empty and aligned")
    return float(np.mean(predicted == labels))
