# -*- coding: utf-8 -*-
#! python3

"""
    Known dynamics x' = f(x, u) with their Jacobians, and measurement encoders.

    Every function here is batched: states are (n,) or (B, n), inputs (m,) or (B, m).
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# 3rd party library
import numpy as np

# submodules
from pil_lab.utils.errors import ShapeError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

ENCODER_KINDS = ("raw", "trig_angle")

# #############################################################################
# ########## Functions #############
# ##################################


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]."""
    return theta - 2.0 * np.pi * np.ceil((theta - np.pi) / (2.0 * np.pi))


def _batch(arr: np.ndarray, dim: int, name: str) -> tuple:
    """Return (2-D view, was_1d) after checking the trailing dimension."""
    arr = np.asarray(arr, dtype=np.float64)
    single = arr.ndim == 1
    arr2 = arr.reshape(1, -1) if single else arr
    if arr2.ndim != 2 or arr2.shape[1] != dim:
        raise ShapeError("{} must have trailing dimension {}, got {}".format(name, dim, arr.shape))
    return arr2, single


# #############################################################################
# ########## Classes ###############
# ##################################


class DynamicsFn(object):
    """Known system dynamics.

    :param str name: short descriptor
    :param int state_dim: n
    :param int input_dim: m
    :param flow: callable (X (B,n), U (B,m)) -> X' (B,n), without angle wrapping
    :param jacobians: callable (X, U) -> (dF/dx (B,n,n), dF/du (B,n,m))
    :param dict params: parameters recorded in metadata
    :param tuple angle_coords: state coordinates holding angles, wrapped by :meth:`wrap`
    """

    def __init__(
        self,
        name: str,
        state_dim: int,
        input_dim: int,
        flow,
        jacobians,
        params: dict = None,
        angle_coords: tuple = (),
    ):
        self.name = name
        self.state_dim = int(state_dim)
        self.input_dim = int(input_dim)
        self._flow = flow
        self._jacobians = jacobians
        self.params = dict(params or {})
        self.angle_coords = tuple(angle_coords)

    def __repr__(self):
        return "DynamicsFn({}, n={}, m={})".format(self.name, self.state_dim, self.input_dim)

    @property
    def descriptor(self) -> dict:
        return {"name": self.name, "params": self.params}

    def flow(self, x, u) -> np.ndarray:
        """Next state without wrapping angles (branch-continuous, used in training graphs)."""
        x2, single = _batch(x, self.state_dim, "state")
        u2, _ = _batch(u, self.input_dim, "input")
        if u2.shape[0] != x2.shape[0]:
            raise ShapeError("batch mismatch between states {} and inputs {}".format(x2.shape, u2.shape))
        out = self._flow(x2, u2)
        return out[0] if single else out

    def jacobians(self, x, u) -> tuple:
        """Return (dF/dx, dF/du) of :meth:`flow`, batched like the inputs."""
        x2, single = _batch(x, self.state_dim, "state")
        u2, _ = _batch(u, self.input_dim, "input")
        jx, ju = self._jacobians(x2, u2)
        return (jx[0], ju[0]) if single else (jx, ju)

    def wrap(self, x) -> np.ndarray:
        """Map angle coordinates back to (-pi, pi]."""
        if not self.angle_coords:
            return np.asarray(x, dtype=np.float64)
        out = np.array(x, dtype=np.float64)
        idx = list(self.angle_coords)
        out[..., idx] = wrap_angle(out[..., idx])
        return out

    def step(self, x, u) -> np.ndarray:
        """Simulation step: flow followed by angle wrapping."""
        return self.wrap(self.flow(x, u))

    def difference(self, a, b) -> np.ndarray:
        """State difference a - b, with angle coordinates wrapped."""
        diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
        if self.angle_coords:
            idx = list(self.angle_coords)
            diff[..., idx] = wrap_angle(diff[..., idx])
        return diff


class ObsEncoder(object):
    """Measurement encoding applied on top of the (noisy) raw state.

    ``raw`` is the identity; ``trig_angle`` replaces the angle coordinate by its
    cosine and sine: (theta, theta_dot) -> (cos theta, sin theta, theta_dot).

    :param str kind: ``raw`` or ``trig_angle``
    :param int angle_index: raw coordinate holding the angle
    """

    def __init__(self, kind: str = "raw", angle_index: int = 0):
        if kind not in ENCODER_KINDS:
            raise ValueError("encoder kind must be one of {}, not '{}'".format(ENCODER_KINDS, kind))
        self.kind = kind
        self.angle_index = int(angle_index)

    def __repr__(self):
        return "ObsEncoder({})".format(self.kind)

    def obs_dim(self, state_dim: int) -> int:
        return state_dim + 1 if self.kind == "trig_angle" else state_dim

    def encode(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "raw":
            return x.copy()
        i = self.angle_index
        theta = x[..., i : i + 1]
        return np.concatenate(
            [x[..., :i], np.cos(theta), np.sin(theta), x[..., i + 1 :]], axis=-1
        )

    def decode(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "raw":
            return y.copy()
        i = self.angle_index
        theta = np.arctan2(y[..., i + 1 : i + 2], y[..., i : i + 1])
        return np.concatenate([y[..., :i], theta, y[..., i + 2 :]], axis=-1)

    def jacobian(self, x) -> np.ndarray:
        """d encode / d x, shape (B, p, n) for batched x."""
        x2 = np.atleast_2d(np.asarray(x, dtype=np.float64))
        batch, n = x2.shape
        p = self.obs_dim(n)
        jac = np.zeros((batch, p, n))
        if self.kind == "raw":
            jac[:] = np.eye(n)
            return jac
        i = self.angle_index
        for k in range(i):
            jac[:, k, k] = 1.0
        jac[:, i, i] = -np.sin(x2[:, i])
        jac[:, i + 1, i] = np.cos(x2[:, i])
        for k in range(i + 1, n):
            jac[:, k + 1, k] = 1.0
        return jac
