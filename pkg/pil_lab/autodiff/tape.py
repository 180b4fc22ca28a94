# -*- coding: utf-8 -*-
#! python3

"""
    Reverse-mode automatic differentiation over a dynamic tape.

    A tape is an append-only list of nodes. Each node stores its op kind, the
    ids of its inputs (always earlier nodes), its forward value and a
    vector-Jacobian product closure. ``backward`` walks the nodes in reverse
    insertion order and accumulates parameter adjoints into the ParamStore.

    Values are numpy arrays: batches of row vectors (B, d), matrices, or 0-d
    scalars. The tape is rebuilt for every minibatch.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# 3rd party library
import numpy as np

# submodules
from pil_lab.autodiff.params import ParamStore
from pil_lab.utils.errors import ShapeError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

LEAKY_SLOPE = 0.01

# #############################################################################
# ########## Functions #############
# ##################################


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast adjoint back to the operand shape."""
    grad = np.asarray(grad)
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# #############################################################################
# ########## Classes ###############
# ##################################


class _Node(object):
    __slots__ = ("kind", "inputs", "value", "vjp", "offset")

    def __init__(self, kind, inputs, value, vjp=None, offset=None):
        self.kind = kind
        self.inputs = inputs
        self.value = value
        self.vjp = vjp
        self.offset = offset


class Tape(object):
    """Dynamic computation graph bound to a parameter store.

    :param ParamStore store: parameters read by :meth:`param` leaves and
        receiving gradients in :meth:`backward`
    """

    def __init__(self, store: ParamStore = None):
        self.store = store
        self.nodes = []

    def __len__(self):
        return len(self.nodes)

    def _push(self, kind, inputs, value, vjp=None, offset=None) -> int:
        self.nodes.append(_Node(kind, tuple(inputs), value, vjp, offset))
        return len(self.nodes) - 1

    def value(self, node: int) -> np.ndarray:
        return self.nodes[node].value

    def shape(self, node: int) -> tuple:
        return np.shape(self.nodes[node].value)

    # -- Leaves ---------------------------------------------------------------
    def constant(self, value) -> int:
        """Leaf without adjoint."""
        return self._push("constant", (), np.array(value, dtype=np.float64))

    def param(self, offset: int, shape: tuple) -> int:
        """Leaf reading ``prod(shape)`` parameters of the store from ``offset``."""
        if self.store is None:
            raise ValueError("parameter leaves need a tape bound to a ParamStore")
        value = self.store.view(offset, shape).copy()
        return self._push("param", (), value, offset=offset)

    # -- Ops ------------------------------------------------------------------
    def matmul(self, a: int, b: int) -> int:
        va, vb = self.value(a), self.value(b)
        if va.ndim != 2 or vb.ndim != 2 or va.shape[1] != vb.shape[0]:
            raise ShapeError("matmul: incompatible shapes {} and {}".format(va.shape, vb.shape))

        def vjp(g):
            return g @ vb.T, va.T @ g

        return self._push("matmul", (a, b), va @ vb, vjp)

    def add(self, a: int, b: int) -> int:
        va, vb = self.value(a), self.value(b)
        try:
            out = va + vb
        except ValueError:
            raise ShapeError("add: incompatible shapes {} and {}".format(va.shape, vb.shape))

        def vjp(g):
            return _unbroadcast(g, va.shape), _unbroadcast(g, vb.shape)

        return self._push("add", (a, b), out, vjp)

    def sub(self, a: int, b: int) -> int:
        va, vb = self.value(a), self.value(b)
        try:
            out = va - vb
        except ValueError:
            raise ShapeError("sub: incompatible shapes {} and {}".format(va.shape, vb.shape))

        def vjp(g):
            return _unbroadcast(g, va.shape), -_unbroadcast(g, vb.shape)

        return self._push("sub", (a, b), out, vjp)

    def mul(self, a: int, b: int) -> int:
        """Elementwise product with broadcasting."""
        va, vb = self.value(a), self.value(b)
        try:
            out = va * vb
        except ValueError:
            raise ShapeError("mul: incompatible shapes {} and {}".format(va.shape, vb.shape))

        def vjp(g):
            return _unbroadcast(g * vb, va.shape), _unbroadcast(g * va, vb.shape)

        return self._push("mul", (a, b), out, vjp)

    def scale(self, a: int, c: float) -> int:
        c = float(c)

        def vjp(g):
            return (c * g,)

        return self._push("scale", (a,), c * self.value(a), vjp)

    def sum(self, a: int) -> int:
        va = self.value(a)

        def vjp(g):
            return (np.broadcast_to(g, va.shape).copy(),)

        return self._push("sum", (a,), np.array(va.sum()), vjp)

    def leaky_relu(self, a: int, slope: float = LEAKY_SLOPE) -> int:
        va = self.value(a)
        mask = np.where(va > 0.0, 1.0, slope)

        def vjp(g):
            return (g * mask,)

        return self._push("leaky_relu", (a,), va * mask, vjp)

    def relu(self, a: int) -> int:
        return self.leaky_relu(a, slope=0.0)

    def tanh(self, a: int) -> int:
        out = np.tanh(self.value(a))

        def vjp(g):
            return (g * (1.0 - out ** 2),)

        return self._push("tanh", (a,), out, vjp)

    def square_norm_weighted(self, x: int, W) -> int:
        """Sum over rows of x_b W x_b^T (0-d result)."""
        vx = self.value(x)
        W = np.asarray(W, dtype=np.float64)
        x2 = vx.reshape(1, -1) if vx.ndim == 1 else vx
        if W.ndim != 2 or W.shape != (x2.shape[-1], x2.shape[-1]):
            raise ShapeError(
                "square_norm_weighted: weight {} does not match operand {}".format(W.shape, vx.shape)
            )
        out = np.array(np.sum((x2 @ W) * x2))

        def vjp(g):
            return ((g * (x2 @ (W + W.T))).reshape(vx.shape),)

        return self._push("square_norm_weighted", (x,), out, vjp)

    def stop_gradient(self, a: int) -> int:
        """Forward the value unchanged; no adjoint flows to the input."""

        def vjp(g):
            return (None,)

        return self._push("stop_gradient", (a,), self.value(a), vjp)

    def dynamics(self, dyn, x: int, u: int) -> int:
        """Apply known dynamics ``dyn.flow`` to batched states and inputs.

        :param DynamicsFn dyn: dynamics with analytic Jacobians
        """
        vx, vu = self.value(x), self.value(u)
        if vx.ndim != 2 or vu.ndim != 2 or vx.shape[0] != vu.shape[0]:
            raise ShapeError("dynamics: batch shapes {} and {} differ".format(vx.shape, vu.shape))
        out = dyn.flow(vx, vu)

        def vjp(g):
            jx, ju = dyn.jacobians(vx, vu)
            return np.einsum("bi,bij->bj", g, jx), np.einsum("bi,bij->bj", g, ju)

        return self._push("dynamics", (x, u), out, vjp)

    def encode(self, encoder, x: int) -> int:
        """Apply a measurement encoder (trig angle encoding or identity)."""
        vx = self.value(x)
        if encoder.kind == "raw":
            return x
        out = encoder.encode(vx)

        def vjp(g):
            return (np.einsum("bi,bij->bj", g, encoder.jacobian(vx)),)

        return self._push("encode", (x,), out, vjp)

    # -- Reverse pass ---------------------------------------------------------
    def backward(self, root: int) -> list:
        """Accumulate d root / d params into the store's gradient buffer.

        :param int root: id of a scalar node

        :return: list of adjoints per node (None where no adjoint flowed)
        """
        root_value = self.value(root)
        if np.size(root_value) != 1:
            raise ShapeError("backward needs a scalar root, got shape {}".format(np.shape(root_value)))
        adjoints = [None] * (root + 1)
        adjoints[root] = np.ones_like(root_value)
        for idx in range(root, -1, -1):
            g = adjoints[idx]
            if g is None:
                continue
            node = self.nodes[idx]
            if node.kind == "param":
                self.store.accumulate(node.offset, g)
                continue
            if node.vjp is None:
                continue
            for inp, gin in zip(node.inputs, node.vjp(g)):
                if gin is None:
                    continue
                if adjoints[inp] is None:
                    adjoints[inp] = np.array(gin, dtype=np.float64)
                else:
                    adjoints[inp] = adjoints[inp] + gin
        return adjoints


def backward(tape: Tape, root: int) -> list:
    """Functional alias of :meth:`Tape.backward`."""
    return tape.backward(root)
