# -*- coding: utf-8 -*-
#! python3

"""
    Exceptions raised by the package, grouped by category so the command-line
    can turn them into distinct exit codes (config, numerical, IO).
"""

# #############################################################################
# ########## Classes ###############
# ##################################


class PilLabError(Exception):
    """Base class of every error raised on purpose by the package."""


class ConfigError(PilLabError, ValueError):
    """Configuration schema violation: unknown key, wrong type, invalid value."""


class ShapeError(PilLabError, ValueError):
    """Operands with incompatible dimensions."""


class NumericalError(PilLabError, ArithmeticError):
    """Base class of numerical failures."""


class SingularMatrixError(NumericalError):
    """Matrix too close to singular to be solved against.

    :param str message: human readable explanation
    :param float rcond: reciprocal condition number estimate, if known
    """

    def __init__(self, message: str, rcond: float = None):
        super(SingularMatrixError, self).__init__(message)
        self.rcond = rcond


class NotPositiveSemidefiniteError(NumericalError):
    """Weight or covariance matrix that should be positive semidefinite is not."""


class ConvergenceError(NumericalError):
    """Fixed-point iteration did not converge within its step budget."""


class TrainingDivergenceError(NumericalError):
    """Loss or gradient became non finite during training.

    :param str message: human readable explanation
    :param float lr: learning rate at the failing step
    :param int epoch: epoch index
    :param int batch: batch index inside the epoch
    """

    def __init__(self, message: str, lr: float = None, epoch: int = None, batch: int = None):
        super(TrainingDivergenceError, self).__init__(
            "{} (lr={}, epoch={}, batch={})".format(message, lr, epoch, batch)
        )
        self.lr = lr
        self.epoch = epoch
        self.batch = batch


class DatasetFormatError(PilLabError, IOError):
    """Serialized artifact (dataset, gain, checkpoint) that cannot be read back."""
