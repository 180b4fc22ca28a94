# -*- coding: utf-8 -*-
#! python3

"""
    Laboratory for model-based imitation learning: behavior cloning, rollout-based
    imitation learning and predictive imitation learning (PIL), in closed form for
    linear systems and with gradient-trained networks for nonlinear ones.
"""

# submodules
from .__about__ import __version__  # noqa: F401

# subpackages
from .numkit import *  # noqa: F401,F403
from .worlds import *  # noqa: F401,F403
from .learners import *  # noqa: F401,F403
from .evaluation import *  # noqa: F401,F403

VERSION = __version__
