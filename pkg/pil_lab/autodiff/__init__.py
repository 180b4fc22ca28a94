# coding: utf-8
#! python3  # noqa: E265

from .checkpoint import load_checkpoint, save_checkpoint  # noqa: F401
from .mlp import Mlp, MlpSpec  # noqa: F401
from .optim import AdamState, adam_step, cosine_lr  # noqa: F401
from .params import ParamStore  # noqa: F401
from .tape import Tape, backward  # noqa: F401
