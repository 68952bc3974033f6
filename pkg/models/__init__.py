"""Domain types: feature models, datasets, chain state and run configurations"""

from models.dataset import Dataset
from models.feature_model import EnumeratedModel, JointState, RbmModel
from models.herd_state import HerdState, RateVector, Trajectory, TransformParams, Variant

__all__ = [
    "Dataset",
    "EnumeratedModel",
    "JointState",
    "RbmModel",
    "HerdState",
    "RateVector",
    "Trajectory",
    "TransformParams",
    "Variant",
]
