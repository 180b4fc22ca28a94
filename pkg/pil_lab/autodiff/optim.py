# -*- coding: utf-8 -*-
#! python3

"""
    Adam optimizer over a ParamStore and cosine learning-rate schedule.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import math
from dataclasses import dataclass, field

# 3rd party library
import numpy as np

# submodules
from pil_lab.autodiff.params import ParamStore
from pil_lab.utils.errors import TrainingDivergenceError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

LR_START = 5e-4
LR_END = 1e-8

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass
class AdamState:
    """Moment estimates of Adam, sized like the ParamStore."""

    size: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)


# #############################################################################
# ########## Functions #############
# ##################################


def adam_step(params: ParamStore, state: AdamState, lr: float):
    """One bias-corrected Adam update of ``params.flat``, then zero the gradients.

    :param ParamStore params: parameters with populated gradients
    :param AdamState state: optimizer state, updated in place
    :param float lr: learning rate

    :raises TrainingDivergenceError: if any gradient is NaN or infinite
    """
    grad = params.grad
    if state.m.shape != grad.shape:
        raise ValueError(
            "optimizer state of size {} does not match {} parameters".format(
                state.m.shape[0], grad.shape[0]
            )
        )
    if not np.all(np.isfinite(grad)):
        raise TrainingDivergenceError("non finite gradient", lr=lr)

    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** state.step)
    v_hat = state.v / (1.0 - state.beta2 ** state.step)
    params.flat -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    params.zero_grad()


def cosine_lr(step: int, total: int, lr_start: float = LR_START, lr_end: float = LR_END) -> float:
    """Cosine decay from ``lr_start`` at step 0 to ``lr_end`` at step ``total``.

    :param int step: current step, 0 <= step <= total
    :param int total: schedule length
    """
    if total <= 0:
        raise ValueError("cosine schedule needs a positive number of steps, got {}".format(total))
    if step < 0 or step > total:
        raise ValueError("step {} outside the schedule [0, {}]".format(step, total))
    return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + math.cos(math.pi * step / total))
