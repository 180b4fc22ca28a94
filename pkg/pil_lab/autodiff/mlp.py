# -*- coding: utf-8 -*-
#! python3

"""
    Multilayer perceptrons whose weights live in a ParamStore segment.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
from dataclasses import asdict, dataclass, field

# 3rd party library
import numpy as np

# submodules
from pil_lab.autodiff.params import ParamStore
from pil_lab.autodiff.tape import LEAKY_SLOPE, Tape
from pil_lab.numkit.noise import RngStream
from pil_lab.utils.errors import ShapeError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

HIDDEN_ACTIVATIONS = ("leaky_relu", "relu", "tanh")
OUTPUT_ACTIVATIONS = ("linear", "tanh")

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass
class MlpSpec:
    """Layer widths from input to output, plus activations.

    ``widths=[2, 16, 16, 1]`` is a 2 -> 16 -> 16 -> 1 network (three layers).
    """

    widths: list = field(default_factory=lambda: [1, 1])
    hidden_activation: str = "leaky_relu"
    output_activation: str = "linear"

    def __post_init__(self):
        self.widths = [int(w) for w in self.widths]
        if len(self.widths) < 2:
            raise ValueError("an MLP needs at least one layer (two widths)")
        if any(w <= 0 for w in self.widths):
            raise ValueError("MLP widths must be positive, got {}".format(self.widths))
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(
                "hidden activation must be one of {}, not '{}'".format(
                    HIDDEN_ACTIVATIONS, self.hidden_activation
                )
            )
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(
                "output activation must be one of {}, not '{}'".format(
                    OUTPUT_ACTIVATIONS, self.output_activation
                )
            )

    @classmethod
    def from_sizes(
        cls,
        n_in: int,
        hidden: list,
        n_out: int,
        hidden_activation: str = "leaky_relu",
        output_activation: str = "linear",
    ) -> "MlpSpec":
        return cls([n_in] + list(hidden) + [n_out], hidden_activation, output_activation)

    @property
    def n_in(self) -> int:
        return self.widths[0]

    @property
    def n_out(self) -> int:
        return self.widths[-1]

    @property
    def n_params(self) -> int:
        return sum((a + 1) * b for a, b in zip(self.widths[:-1], self.widths[1:]))

    def asDict(self) -> dict:
        return asdict(self)


class Mlp(object):
    """MLP stored in the ``segment`` of a ParamStore.

    Layout inside the segment: for each layer, W (n_in x n_out) then b (n_out).
    Initialization: uniform in +/- 1/sqrt(fan_in) for weights and biases.

    :param MlpSpec spec: architecture
    :param ParamStore store: parameter store receiving a new segment
    :param str segment: segment name
    :param RngStream rng: initializer stream
    """

    def __init__(self, spec: MlpSpec, store: ParamStore, segment: str, rng: RngStream = None):
        self.spec = spec
        self.store = store
        self.segment = segment
        if segment in store.segments:
            start, stop = store.segments[segment]
            if stop - start != spec.n_params:
                raise ShapeError(
                    "segment '{}' holds {} parameters, spec needs {}".format(
                        segment, stop - start, spec.n_params
                    )
                )
            self.offset = start
        else:
            self.offset = store.add_segment(segment, spec.n_params)

        self.layers = []
        offset = self.offset
        for fan_in, fan_out in zip(spec.widths[:-1], spec.widths[1:]):
            self.layers.append((offset, (fan_in, fan_out), offset + fan_in * fan_out, (fan_out,)))
            offset += (fan_in + 1) * fan_out

        if rng is not None:
            self.initialize(rng)

    def __repr__(self):
        return "Mlp({}, widths={})".format(self.segment, self.spec.widths)

    def initialize(self, rng: RngStream):
        """Draw fresh weights in place."""
        chunks = []
        for _, (fan_in, fan_out), _, _ in self.layers:
            bound = 1.0 / np.sqrt(fan_in)
            chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
            chunks.append(rng.uniform(-bound, bound, size=fan_out))
        self.store.segment(self.segment)[:] = np.concatenate(chunks)

    def forward(self, tape: Tape, x: int) -> int:
        """Add the network to the tape; ``x`` is a (B, n_in) node."""
        if tape.shape(x)[-1] != self.spec.n_in:
            raise ShapeError(
                "{} expects inputs of width {}, got {}".format(self, self.spec.n_in, tape.shape(x))
            )
        h = x
        last = len(self.layers) - 1
        for i, (w_off, w_shape, b_off, b_shape) in enumerate(self.layers):
            h = tape.add(tape.matmul(h, tape.param(w_off, w_shape)), tape.param(b_off, b_shape))
            act = self.spec.output_activation if i == last else self.spec.hidden_activation
            h = _tape_activation(tape, h, act)
        return h

    def apply(self, x) -> np.ndarray:
        """Plain numpy forward pass (no tape), for deployment and experts."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x.reshape(1, -1) if single else x
        last = len(self.layers) - 1
        for i, (w_off, w_shape, b_off, b_shape) in enumerate(self.layers):
            h = h @ self.store.view(w_off, w_shape) + self.store.view(b_off, b_shape)
            act = self.spec.output_activation if i == last else self.spec.hidden_activation
            h = _np_activation(h, act)
        return h[0] if single else h

    __call__ = apply


# #############################################################################
# ########## Functions #############
# ##################################


def _tape_activation(tape: Tape, h: int, kind: str) -> int:
    if kind == "leaky_relu":
        return tape.leaky_relu(h)
    if kind == "relu":
        return tape.relu(h)
    if kind == "tanh":
        return tape.tanh(h)
    return h


def _np_activation(h: np.ndarray, kind: str) -> np.ndarray:
    if kind == "leaky_relu":
        return np.where(h > 0.0, h, LEAKY_SLOPE * h)
    if kind == "relu":
        return np.maximum(h, 0.0)
    if kind == "tanh":
        return np.tanh(h)
    return h
