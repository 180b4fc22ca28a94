# -*- coding: utf-8 -*-
#! python3

"""
    Flat parameter vector partitioned into named segments, with its gradient buffer.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
from collections import OrderedDict

# 3rd party library
import numpy as np

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

# #############################################################################
# ########## Classes ###############
# ##################################


class ParamStore(object):
    """Flat float64 parameters + gradients, split in disjoint named segments.

    Segments are appended in order, so they are disjoint and cover the vector.
    Views into ``flat`` must be taken after the last segment is added (adding a
    segment reallocates the buffers).
    """

    def __init__(self):
        self.flat = np.zeros(0)
        self.grad = np.zeros(0)
        self.segments = OrderedDict()

    def __len__(self):
        return self.flat.shape[0]

    def __repr__(self):
        return "ParamStore(size={}, segments={})".format(len(self), list(self.segments))

    def add_segment(self, name: str, size: int) -> int:
        """Append a zero-initialized segment and return its offset.

        :param str name: unique segment name
        :param int size: number of parameters
        """
        if name in self.segments:
            raise ValueError("segment '{}' already exists".format(name))
        if size < 0:
            raise ValueError("segment size must be nonnegative, got {}".format(size))
        start = len(self)
        self.flat = np.concatenate([self.flat, np.zeros(size)])
        self.grad = np.concatenate([self.grad, np.zeros(size)])
        self.segments[name] = (start, start + size)
        return start

    def segment(self, name: str) -> np.ndarray:
        """Writable view of a segment's parameters."""
        start, stop = self.segments[name]
        return self.flat[start:stop]

    def segment_grad(self, name: str) -> np.ndarray:
        start, stop = self.segments[name]
        return self.grad[start:stop]

    def view(self, offset: int, shape: tuple) -> np.ndarray:
        """Writable view of ``prod(shape)`` parameters starting at ``offset``."""
        size = int(np.prod(shape))
        return self.flat[offset : offset + size].reshape(shape)

    def accumulate(self, offset: int, grad: np.ndarray):
        """Add a gradient block at ``offset``."""
        grad = np.asarray(grad).reshape(-1)
        self.grad[offset : offset + grad.shape[0]] += grad

    def zero_grad(self):
        self.grad[:] = 0.0

    def segment_map(self) -> dict:
        return {name: [start, stop] for name, (start, stop) in self.segments.items()}

    def load_flat(self, flat: np.ndarray):
        """Overwrite every parameter (same length) in place."""
        flat = np.asarray(flat, dtype=np.float64).reshape(-1)
        if flat.shape != self.flat.shape:
            raise ValueError(
                "parameter vector of length {} cannot be loaded into store of size {}".format(
                    flat.shape[0], len(self)
                )
            )
        self.flat[:] = flat
