"""Dataset of observed visible configurations."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from core.errors import DataError
from models.feature_model import EnumeratedModel, FeatureModel, RbmModel


@dataclass(frozen=True, eq=False)
class Dataset:
    """N visible configurations x_n, optionally labelled.

    Attributes:
        cases: (N, D) array of visible configurations
        labels: Optional (N,) integer class labels
    """

    cases: NDArray
    labels: NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        cases = np.asarray(self.cases)
        if cases.ndim == 1:
            cases = cases[:, None]
        if cases.ndim != 2 or cases.shape[0] < 1:
            raise DataError("dataset must contain at least one case")
        if not np.isfinite(cases.astype(np.float64)).all():
            raise DataError("dataset entries must be finite")
        object.__setattr__(self, "cases", cases)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (cases.shape[0],):
                raise DataError("labels must have one entry per case")
            object.__setattr__(self, "labels", labels)

    @property
    def num_cases(self) -> int:
        return self.cases.shape[0]

    @property
    def dim(self) -> int:
        return self.cases.shape[1]

    def is_spin(self) -> bool:
        return bool(np.isin(self.cases, (-1, 1)).all())

    def subset(self, indices: NDArray[np.int64]) -> "Dataset":
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(cases=self.cases[indices], labels=labels)

    def for_class(self, label: int) -> "Dataset":
        if self.labels is None:
            raise DataError("dataset has no labels")
        idx = np.flatnonzero(self.labels == label)
        if idx.size == 0:
            raise DataError(f"class {label} has no cases")
        return self.subset(idx)

    def check_model(self, model: FeatureModel) -> None:
        """Raise ``DataError`` if the cases do not fit the model."""
        if self.dim != model.visible_dim:
            raise DataError(
                f"case dimension {self.dim} does not match model visible dimension "
                f"{model.visible_dim}"
            )
        if isinstance(model, RbmModel) and not self.is_spin():
            raise DataError("RBM datasets must contain only -1 and +1")
        if isinstance(model, EnumeratedModel):
            model.visible_indices(self.cases)

    def visibles_for(self, model: FeatureModel) -> NDArray:
        """Cases in the form the maximizers consume: spins or visible indices."""
        self.check_model(model)
        if isinstance(model, RbmModel):
            return self.cases.astype(np.int8)
        return model.visible_indices(self.cases)


def concat_datasets(parts: list[Dataset]) -> Dataset:
    """Stack labelled datasets in the given order."""
    cases = np.concatenate([p.cases for p in parts], axis=0)
    if any(p.labels is None for p in parts):
        return Dataset(cases=cases)
    labels = np.concatenate([p.labels for p in parts])  # type: ignore[misc]
    return Dataset(cases=cases, labels=labels)
