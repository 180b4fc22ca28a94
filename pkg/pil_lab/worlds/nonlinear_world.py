# -*- coding: utf-8 -*-
#! python3

"""
    Nonlinear environments: a torque pendulum (theta = 0 is upright) driven by an
    energy swing-up + LQR expert, and the linear benchmark system driven by a
    frozen random MLP expert.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import math
from dataclasses import asdict, dataclass

# 3rd party library
import numpy as np

# submodules
from pil_lab.autodiff.mlp import Mlp, MlpSpec
from pil_lab.autodiff.params import ParamStore
from pil_lab.numkit.noise import NoiseModel, RngStream
from pil_lab.worlds.dataset import TrajectoryDataset
from pil_lab.worlds.dynamics import DynamicsFn, ObsEncoder
from pil_lab.worlds.lti_world import LtiSystem, lqr_gain, simulate_expert

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

# LQR catch region around the upright equilibrium
CATCH_ANGLE = 0.3
CATCH_RATE = 1.0
SWING_GAIN = 1.0
LQR_QC = np.diag([1.0, 0.1])
LQR_RC = np.array([[0.1]])

# measurement bounds of the pendulum data, in degrees
PENDULUM_ANGLE_NOISE_DEG = 1.0
PENDULUM_RATE_NOISE_DEG = 0.001
PENDULUM_INPUT_NOISE = 0.1

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass(frozen=True)
class PendulumParams:
    """Rigid rod pendulum actuated at the pivot."""

    g: float = 9.81
    l: float = 1.0  # noqa: E741
    mass: float = 1.0
    dt: float = 0.05
    torque_limit: float = 2.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0.0:
                raise ValueError("pendulum parameter '{}' must be positive, got {}".format(name, value))

    @property
    def gravity_coef(self) -> float:
        """3 g / (2 l)"""
        return 3.0 * self.g / (2.0 * self.l)

    @property
    def input_coef(self) -> float:
        """3 / (m l^2)"""
        return 3.0 / (self.mass * self.l ** 2)

    @property
    def energy_target(self) -> float:
        """Energy of the upright equilibrium at rest."""
        return 0.5 * self.mass * self.g * self.l

    def energy(self, x) -> np.ndarray:
        """E = 1/2 (m l^2 / 3) theta_dot^2 + (m g l / 2) cos(theta)."""
        x = np.asarray(x, dtype=np.float64)
        inertia = self.mass * self.l ** 2 / 3.0
        return 0.5 * inertia * x[..., 1] ** 2 + self.energy_target * np.cos(x[..., 0])

    def linearization(self) -> LtiSystem:
        """Exact linearization of the integrator step at the upright equilibrium."""
        a, b, dt = self.gravity_coef, self.input_coef, self.dt
        return LtiSystem(
            A=[[1.0 + dt * dt * a, dt], [dt * a, 1.0]],
            B=[[dt * dt * b], [dt * b]],
        )


class PendulumExpert(object):
    """Energy-shaping swing-up with an LQR catch near upright, batched.

    :param PendulumParams params: pendulum parameters
    :param float swing_gain: energy shaping gain k_e
    """

    def __init__(self, params: PendulumParams = None, swing_gain: float = SWING_GAIN):
        self.params = params or PendulumParams()
        self.swing_gain = float(swing_gain)
        self.gain = lqr_gain(self.params.linearization(), LQR_QC, LQR_RC).K

    def __repr__(self):
        return "PendulumExpert(K={})".format(self.gain.tolist())

    @property
    def descriptor(self) -> dict:
        return {
            "kind": "pendulum_swingup_lqr",
            "K": self.gain.tolist(),
            "swing_gain": self.swing_gain,
            "catch": [CATCH_ANGLE, CATCH_RATE],
        }

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x.reshape(1, -1) if single else x
        theta, rate = x2[:, 0], x2[:, 1]
        lqr = x2 @ self.gain.T
        swing = (-self.swing_gain * rate * (self.params.energy(x2) - self.params.energy_target))[:, None]
        near = (np.abs(theta) < CATCH_ANGLE) & (np.abs(rate) < CATCH_RATE)
        u = np.where(near[:, None], lqr, swing)
        u = np.clip(u, -self.params.torque_limit, self.params.torque_limit)
        return u[0] if single else u


class RandomMlpExpert(Mlp):
    """Read-only MLP drawn from ``seed``; the seed and spec rebuild it exactly.

    :param MlpSpec spec: architecture
    :param int seed: initializer seed
    """

    def __init__(self, spec: MlpSpec, seed: int):
        super().__init__(spec, ParamStore(), "expert", rng=RngStream(seed))
        self.seed = int(seed)
        self.store.flat.setflags(write=False)

    def __repr__(self):
        return "RandomMlpExpert(seed={}, widths={})".format(self.seed, self.spec.widths)

    @property
    def descriptor(self) -> dict:
        return {"kind": "random_mlp", "seed": self.seed, "spec": self.spec.asDict()}

    @classmethod
    def from_descriptor(cls, descriptor: dict) -> "RandomMlpExpert":
        return cls(MlpSpec(**descriptor["spec"]), descriptor["seed"])


# #############################################################################
# ########## Functions #############
# ##################################


def pendulum_dynamics(params: PendulumParams = None) -> DynamicsFn:
    """Semi-implicit Euler pendulum as a :class:`DynamicsFn`.

    The torque is clipped to the limit inside the step; the input Jacobian is
    zero where the clip is active.
    """
    params = params or PendulumParams()
    a, b, dt, lim = params.gravity_coef, params.input_coef, params.dt, params.torque_limit

    def _flow(x, u):
        u_c = np.clip(u[:, 0], -lim, lim)
        rate = x[:, 1] + dt * (a * np.sin(x[:, 0]) + b * u_c)
        return np.stack([x[:, 0] + dt * rate, rate], axis=1)

    def _jacobians(x, u):
        batch = x.shape[0]
        cos_t = np.cos(x[:, 0])
        free = (np.abs(u[:, 0]) < lim).astype(np.float64)
        jx = np.zeros((batch, 2, 2))
        jx[:, 0, 0] = 1.0 + dt * dt * a * cos_t
        jx[:, 0, 1] = dt
        jx[:, 1, 0] = dt * a * cos_t
        jx[:, 1, 1] = 1.0
        ju = np.zeros((batch, 2, 1))
        ju[:, 0, 0] = dt * dt * b * free
        ju[:, 1, 0] = dt * b * free
        return jx, ju

    return DynamicsFn("pendulum", 2, 1, _flow, _jacobians, params=asdict(params), angle_coords=(0,))


def pendulum_step(state, u, params: PendulumParams = None) -> np.ndarray:
    """One wrapped pendulum step from (theta, theta_dot) under torque u."""
    return pendulum_dynamics(params).step(state, np.atleast_1d(np.asarray(u, dtype=np.float64)))


def pendulum_expert(params: PendulumParams = None) -> PendulumExpert:
    return PendulumExpert(params)


def pendulum_noise_models(
    angle_deg: float = PENDULUM_ANGLE_NOISE_DEG,
    rate_deg: float = PENDULUM_RATE_NOISE_DEG,
    input_bound: float = PENDULUM_INPUT_NOISE,
) -> tuple:
    """Uniform measurement noise of the pendulum data, bounds given in degrees.

    :return: (xi_model, eta_model, bounds metadata in the original units)
    """
    xi = NoiseModel.uniform([math.radians(angle_deg), math.radians(rate_deg)])
    eta = NoiseModel.uniform([input_bound])
    bounds = {"angle_deg": angle_deg, "rate_deg_per_s": rate_deg, "input": input_bound}
    return xi, eta, bounds


def pendulum_x0_model() -> NoiseModel:
    """theta_0 uniform in [-pi, pi], theta_dot_0 uniform in [-1, 1]."""
    return NoiseModel.uniform([math.pi, 1.0])


def mlp_expert_linear(sys: LtiSystem, seed: int, hidden: tuple = (16, 16)) -> RandomMlpExpert:
    """Frozen random MLP expert n -> 16 -> 16 -> m, ReLU hidden layers and tanh output.

    :param LtiSystem sys: driven system (fixes the input and output widths)
    :param int seed: initializer seed
    """
    spec = MlpSpec.from_sizes(sys.n, hidden, sys.m, hidden_activation="relu", output_activation="tanh")
    return RandomMlpExpert(spec, seed)


def generate_nonlinear_dataset(
    dyn: DynamicsFn,
    expert,
    n_traj: int,
    T: int,
    x0_model: NoiseModel,
    xi_model: NoiseModel,
    eta_model: NoiseModel,
    encoder: ObsEncoder,
    rng: RngStream,
    noise_bounds: dict = None,
) -> TrajectoryDataset:
    """Expert trajectories of a nonlinear world with encoded noisy measurements.

    Noise is added to the raw state before encoding. ``noise_bounds`` keeps the
    bounds in their original units (degrees for the pendulum) in the metadata.
    """
    meta = {"expert": getattr(expert, "descriptor", {"kind": type(expert).__name__})}
    if noise_bounds:
        meta["noise_bounds"] = dict(noise_bounds)
    return simulate_expert(
        dyn, expert, n_traj, T, x0_model, xi_model, eta_model, rng, encoder=encoder, meta=meta
    )
