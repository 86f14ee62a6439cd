"""Feed-forward networks trained with tree-importance boosted gradient descent."""

from .artifact import ModelArtifact
from .data import Dataset, Schema, SplitPair, prepare
from .errors import (DataError, DivergenceError, FormatVersionError, NonFiniteError, ScaleError, SchemaMismatchError,
                     ShapeError, ValidationError, XBNetError)
from .gbdt import GbtConfig, GbtModel
from .network import XbnetModel, build_model
from .optim import BoostedGradientDescent, TrainConfig, TrainTrace, train

__version__ = "0.1.0"

__all__ = [
    "BoostedGradientDescent", "DataError", "Dataset", "DivergenceError", "FormatVersionError",
    "GbtConfig", "GbtModel", "ModelArtifact", "NonFiniteError", "ScaleError", "Schema", "SchemaMismatchError",
    "ShapeError", "SplitPair", "TrainConfig", "TrainTrace", "ValidationError", "XBNetError",
    "XbnetModel", "build_model", "prepare", "train",
]
