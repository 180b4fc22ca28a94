# -*- coding: utf-8 -*-
#! python3

"""
    Random streams and measurement noise models.

    A RngStream wraps a numpy Generator seeded through a SeedSequence, so it can
    be split into independent child streams (one per trajectory, per seed...).
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# 3rd party library
import numpy as np

# submodules
from pil_lab.numkit.linalg import as_mat, check_psd
from pil_lab.utils.errors import ShapeError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

NOISE_KINDS = ("gaussian", "uniform", "none")

# #############################################################################
# ########## Classes ###############
# ##################################


class RngStream(object):
    """Seeded, splittable random stream.

    :param int seed: unsigned 64-bit seed
    :param np.random.SeedSequence seed_sequence: internal, used by :meth:`spawn`
    """

    def __init__(self, seed: int = 0, seed_sequence: np.random.SeedSequence = None):
        if seed_sequence is None:
            if int(seed) < 0 or int(seed) >= 2 ** 64:
                raise ValueError("seed must be an unsigned 64-bit integer, got {}".format(seed))
            seed_sequence = np.random.SeedSequence(int(seed))
        self.seed = int(seed_sequence.entropy)
        self._seq = seed_sequence
        self.generator = np.random.Generator(np.random.PCG64(seed_sequence))

    def __repr__(self):
        return "RngStream(seed={}, spawn_key={})".format(self.seed, self._seq.spawn_key)

    def spawn(self, count: int) -> list:
        """Split into ``count`` independent child streams.

        Children depend only on the parent seed and on how many children were
        spawned before, never on the draws made from the parent.

        :param int count: number of child streams
        """
        return [RngStream(seed_sequence=seq) for seq in self._seq.spawn(count)]

    def clone(self) -> "RngStream":
        """Fresh stream replaying this one from its initial state."""
        seq = np.random.SeedSequence(
            self._seq.entropy, spawn_key=self._seq.spawn_key, pool_size=self._seq.pool_size
        )
        return RngStream(seed_sequence=seq)

    # shortcuts used by the worlds
    def normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def integers(self, low: int, high: int = None, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size)


class NoiseModel(object):
    """Measurement noise distribution.

    :param str kind: one of ``gaussian``, ``uniform``, ``none``
    :param scale: covariance matrix (gaussian) or per-coordinate half-widths
        (uniform). A scalar is broadcast to ``dim`` coordinates.
    :param int dim: dimensionality, required when ``scale`` is a scalar
    """

    def __init__(self, kind: str = "none", scale=None, dim: int = None):
        kind = str(kind).lower()
        if kind not in NOISE_KINDS:
            raise ValueError(
                "noise kind must be one of {}, not '{}'".format(NOISE_KINDS, kind)
            )
        self.kind = kind
        self.dim = dim
        self.scale = None
        self._chol = None

        if kind == "gaussian":
            cov = np.asarray(scale if scale is not None else 0.0, dtype=np.float64)
            if cov.ndim == 0:
                if dim is None:
                    raise ValueError("a scalar gaussian variance needs 'dim'")
                cov = float(cov) * np.eye(dim)
            elif cov.ndim == 1:
                cov = np.diag(cov)
            cov = check_psd(cov, "gaussian noise covariance")
            self.scale = cov
            self.dim = cov.shape[0]
            # eigen-factor tolerates singular (PSD) covariances
            lam, vecs = np.linalg.eigh(cov)
            self._chol = vecs * np.sqrt(np.clip(lam, 0.0, None))
        elif kind == "uniform":
            bounds = np.asarray(scale if scale is not None else 0.0, dtype=np.float64)
            if bounds.ndim == 0:
                if dim is None:
                    raise ValueError("a scalar uniform bound needs 'dim'")
                bounds = np.full(dim, float(bounds))
            bounds = bounds.reshape(-1)
            if np.any(bounds < 0) or not np.all(np.isfinite(bounds)):
                raise ValueError("uniform bounds must be finite and nonnegative")
            self.scale = bounds
            self.dim = bounds.shape[0]

    def __repr__(self):
        return "NoiseModel(kind={}, dim={})".format(self.kind, self.dim)

    @classmethod
    def none(cls, dim: int = None) -> "NoiseModel":
        return cls("none", dim=dim)

    @classmethod
    def gaussian(cls, cov, dim: int = None) -> "NoiseModel":
        return cls("gaussian", cov, dim=dim)

    @classmethod
    def uniform(cls, bounds, dim: int = None) -> "NoiseModel":
        return cls("uniform", bounds, dim=dim)

    @property
    def covariance(self) -> np.ndarray:
        """Covariance of the distribution (uniform: b_i^2 / 3 on the diagonal)."""
        if self.kind == "gaussian":
            return self.scale.copy()
        if self.kind == "uniform":
            return np.diag(self.scale ** 2 / 3.0)
        return np.zeros((self.dim or 0, self.dim or 0))

    def asDict(self) -> dict:
        """Return the model as a JSON-friendly dictionary."""
        scale = None if self.scale is None else np.asarray(self.scale).tolist()
        return {"kind": self.kind, "scale": scale, "dim": self.dim}

    @classmethod
    def fromDict(cls, data: dict) -> "NoiseModel":
        return cls(data.get("kind", "none"), data.get("scale"), dim=data.get("dim"))


# #############################################################################
# ########## Functions #############
# ##################################


def sample_noise(model: NoiseModel, dim: int, rng: RngStream, size: int = None) -> np.ndarray:
    """Draw one noise vector (or ``size`` stacked vectors) from the model.

    :param NoiseModel model: distribution
    :param int dim: expected dimensionality
    :param RngStream rng: random stream, advanced in place
    :param int size: optional number of samples; returns shape (size, dim) if given
    """
    if model.dim is not None and model.dim != dim:
        raise ShapeError(
            "noise model has dimension {} but {} was requested".format(model.dim, dim)
        )
    shape = (dim,) if size is None else (size, dim)
    if model.kind == "none":
        return np.zeros(shape)
    if model.kind == "uniform":
        return rng.uniform(-model.scale, model.scale, size=shape)
    draws = rng.normal(size=shape)
    return draws @ model._chol.T


def as_noise_model(value, dim: int) -> NoiseModel:
    """Coerce a config fragment, a covariance or an existing model to a NoiseModel."""
    if isinstance(value, NoiseModel):
        return value
    if value is None:
        return NoiseModel.none(dim)
    if isinstance(value, dict):
        return NoiseModel(value.get("kind", "none"), value.get("scale"), dim=dim)
    return NoiseModel.gaussian(as_mat(value), dim=dim)
