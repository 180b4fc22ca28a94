# coding: utf-8
#! python3  # noqa: E265

from .errors import (  # noqa: F401
    ConfigError,
    ConvergenceError,
    DatasetFormatError,
    NotPositiveSemidefiniteError,
    NumericalError,
    PilLabError,
    ShapeError,
    SingularMatrixError,
    TrainingDivergenceError,
)
from .config import ExperimentConfig  # noqa: F401
