# -*- coding: utf-8 -*-
#! python3

"""
    Linear time-invariant world: x_{t+1} = A x_t + B u_t, measured through
    y_t = x_t + xi_t and v_t = u_t + eta_t.

    Sign convention: policies are u = K x, so the LQR gain is the negated
    Riccati feedback.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
from dataclasses import dataclass

# 3rd party library
import numpy as np
from scipy import linalg as sla

# submodules
from pil_lab.numkit.linalg import as_mat, check_psd, solve_linear, spectral_radius
from pil_lab.numkit.noise import NoiseModel, RngStream, sample_noise
from pil_lab.utils.errors import ConvergenceError, ShapeError
from pil_lab.worlds.dataset import Trajectory, TrajectoryDataset
from pil_lab.worlds.dynamics import DynamicsFn, ObsEncoder

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

RICCATI_TOL = 1e-12
RICCATI_MAX_ITER = 100000

# #############################################################################
# ########## Classes ###############
# ##################################


class LtiSystem(object):
    """Discrete-time linear system (A, B).

    :param A: n x n dynamics matrix
    :param B: n x m input matrix
    """

    def __init__(self, A, B):
        self.A = as_mat(A, "A")
        self.B = as_mat(B, "B")
        if self.A.shape[0] != self.A.shape[1]:
            raise ShapeError("A must be square, got {}".format(self.A.shape))
        if self.B.shape[0] != self.A.shape[0]:
            raise ShapeError(
                "B must have {} rows to match A, got {}".format(self.A.shape[0], self.B.shape)
            )
        self.A.setflags(write=False)
        self.B.setflags(write=False)

    def __repr__(self):
        return "LtiSystem(n={}, m={})".format(self.n, self.m)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def descriptor(self) -> dict:
        return {"name": "lti", "params": {"A": self.A.tolist(), "B": self.B.tolist()}}

    def closed_loop(self, K) -> np.ndarray:
        """A + B K."""
        return self.A + self.B @ as_mat(K, "K")

    def as_dynamics(self) -> DynamicsFn:
        """Wrap the system as a :class:`DynamicsFn` with constant Jacobians."""
        A, B = self.A, self.B

        def _flow(x, u):
            return x @ A.T + u @ B.T

        def _jacobians(x, u):
            batch = x.shape[0]
            return (
                np.broadcast_to(A, (batch,) + A.shape).copy(),
                np.broadcast_to(B, (batch,) + B.shape).copy(),
            )

        return DynamicsFn(
            "lti", self.n, self.m, _flow, _jacobians, params=self.descriptor["params"]
        )


@dataclass(frozen=True)
class FeedbackGain:
    """State feedback u = K x."""

    K: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.K.shape

    def policy(self) -> "LinearPolicy":
        return LinearPolicy(self.K)


class LinearPolicy(object):
    """Callable u = K x accepting a single state (n,) or a batch (B, n)."""

    def __init__(self, K):
        self.K = as_mat(K, "K")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return x @ self.K.T


@dataclass(frozen=True)
class CoverageReport:
    """Smallest eigenvalue of the normalized empirical state Gram matrix."""

    phi_x: float
    H: int
    n_samples: int


# #############################################################################
# ########## Functions #############
# ##################################


def reference_system() -> LtiSystem:
    """Two-state benchmark system used by the linear experiments."""
    return LtiSystem(A=[[0.95, 0.05], [0.0, 0.95]], B=[[0.0], [0.05]])


def lqr_gain(
    sys: LtiSystem,
    Qc,
    Rc,
    tol: float = RICCATI_TOL,
    max_iter: int = RICCATI_MAX_ITER,
) -> FeedbackGain:
    """Infinite-horizon discrete LQR gain by fixed-point Riccati iteration.

    P <- Qc + A'PA - A'PB (Rc + B'PB)^-1 B'PA, starting from P = Qc, then
    K = -(Rc + B'PB)^-1 B'PA.

    :param LtiSystem sys: stabilizable system
    :param Qc: state cost, positive semidefinite
    :param Rc: input cost, positive definite
    :param float tol: relative fixed-point tolerance on P
    :param int max_iter: iteration budget

    :raises ConvergenceError: if P does not settle within ``max_iter`` steps
    """
    A, B = sys.A, sys.B
    Qc = check_psd(Qc, "Qc")
    Rc = check_psd(Rc, "Rc")
    if Qc.shape != (sys.n, sys.n) or Rc.shape != (sys.m, sys.m):
        raise ShapeError(
            "cost shapes {} / {} do not match system (n={}, m={})".format(
                Qc.shape, Rc.shape, sys.n, sys.m
            )
        )
    if sla.eigvalsh(Rc)[0] <= 0.0:
        raise ValueError("Rc must be positive definite")

    P = Qc.copy()
    for it in range(max_iter):
        BtPA = B.T @ P @ A
        gain_term = A.T @ P @ B @ solve_linear(Rc + B.T @ P @ B, BtPA)
        P_next = Qc + A.T @ P @ A - gain_term
        P_next = 0.5 * (P_next + P_next.T)
        delta = np.max(np.abs(P_next - P))
        P = P_next
        if delta <= tol * max(1.0, np.max(np.abs(P))):
            break
    else:
        raise ConvergenceError(
            "Riccati iteration did not converge in {} steps (last change {:.3e})".format(
                max_iter, delta
            )
        )

    K = -solve_linear(Rc + B.T @ P @ B, B.T @ P @ A)
    logger.debug(
        "LQR gain after {} Riccati steps, closed-loop spectral radius {:.4f}".format(
            it + 1, spectral_radius(A + B @ K)
        )
    )
    return FeedbackGain(K=K)


def generate_expert_dataset(
    sys: LtiSystem,
    K,
    n_traj: int,
    T: int,
    x0_model: NoiseModel,
    xi_model: NoiseModel,
    eta_model: NoiseModel,
    rng: RngStream,
) -> TrajectoryDataset:
    """Roll the expert u = K x on the true state and record noisy measurements.

    Each trajectory draws from its own child stream of ``rng``.

    :param LtiSystem sys: system
    :param K: expert gain (:class:`FeedbackGain`, matrix, or batch-capable callable)
    :param int n_traj: number of trajectories
    :param int T: number of steps per trajectory
    :param NoiseModel x0_model: initial state distribution
    :param NoiseModel xi_model: state measurement noise
    :param NoiseModel eta_model: input measurement noise
    :param RngStream rng: random stream
    """
    policy = _as_policy(K)
    descriptor = {"kind": "linear_gain", "K": policy.K.tolist()} if isinstance(
        policy, LinearPolicy
    ) else {"kind": type(policy).__name__}
    return simulate_expert(
        sys.as_dynamics(),
        policy,
        n_traj,
        T,
        x0_model,
        xi_model,
        eta_model,
        rng,
        encoder=ObsEncoder("raw"),
        meta={"system": sys.descriptor, "expert": descriptor},
    )


def simulate_expert(
    dyn: DynamicsFn,
    expert,
    n_traj: int,
    T: int,
    x0_model: NoiseModel,
    xi_model: NoiseModel,
    eta_model: NoiseModel,
    rng: RngStream,
    encoder: ObsEncoder = None,
    meta: dict = None,
) -> TrajectoryDataset:
    """Shared generator for linear and nonlinear worlds.

    The expert acts on the true state; measurement noise is added to the raw
    state before encoding and to the expert input.
    """
    encoder = encoder or ObsEncoder("raw")
    n, m = dyn.state_dim, dyn.input_dim
    if n_traj < 1 or T < 1:
        raise ValueError("n_traj and T must be positive, got {} and {}".format(n_traj, T))

    # one child stream per trajectory: x0, then the xi and eta sequences
    x0 = np.zeros((n_traj, n))
    xi = np.zeros((n_traj, T + 1, n))
    eta = np.zeros((n_traj, T, m))
    for k, child in enumerate(rng.spawn(n_traj)):
        x0[k] = sample_noise(x0_model, n, child)
        xi[k] = sample_noise(xi_model, n, child, size=T + 1)
        eta[k] = sample_noise(eta_model, m, child, size=T)

    x = np.zeros((n_traj, T + 1, n))
    u = np.zeros((n_traj, T, m))
    x[:, 0] = x0
    for t in range(T):
        u_t = np.asarray(expert(x[:, t]), dtype=np.float64).reshape(n_traj, -1)
        if u_t.shape[1] != m:
            raise ShapeError("expert returned {} inputs, system expects {}".format(u_t.shape[1], m))
        u[:, t] = u_t
        x[:, t + 1] = dyn.step(x[:, t], u_t)

    y = encoder.encode(x + xi)
    v = u + eta

    meta = dict(meta or {})
    meta.update(
        {
            "dynamics": dyn.descriptor,
            "encoder": encoder.kind,
            "noise": {
                "x0": x0_model.asDict(),
                "xi": xi_model.asDict(),
                "eta": eta_model.asDict(),
            },
            "seed": rng.seed,
        }
    )
    dataset = TrajectoryDataset(x=x, u=u, y=y, v=v, xi=xi, eta=eta, meta=meta)
    logger.debug("Generated {}".format(dataset))
    return dataset


def rollout_learned(
    world,
    policy,
    x0,
    T: int,
    xi_model: NoiseModel,
    rng: RngStream,
    encoder: ObsEncoder = None,
) -> Trajectory:
    """Closed loop of a learned policy acting on noisy measurements.

    x_{t+1} = f(x_t, policy(y_t)) with y_t = encode(x_t + xi_t), fresh noise each step.

    :param world: :class:`LtiSystem` or :class:`DynamicsFn`
    :param policy: callable measurement -> input
    :param x0: initial true state
    :param int T: number of steps
    :param NoiseModel xi_model: measurement noise
    :param RngStream rng: random stream
    :param ObsEncoder encoder: measurement encoding, raw by default
    """
    dyn = as_dynamics(world)
    encoder = encoder or ObsEncoder("raw")
    x0 = np.asarray(x0, dtype=np.float64).reshape(1, dyn.state_dim)
    xi = sample_noise(xi_model, dyn.state_dim, rng, size=T + 1)[None]
    x, u, y = rollout_learned_batch(dyn, policy, x0, T, xi, encoder)
    return Trajectory(x=x[0], u=u[0], y=y[0], v=u[0].copy(), xi=xi[0], eta=np.zeros_like(u[0]))


def rollout_learned_batch(
    world, policy, x0: np.ndarray, T: int, xi: np.ndarray, encoder: ObsEncoder = None
) -> tuple:
    """Batched learned closed loop with pre-drawn measurement noise.

    :param x0: initial states, shape (N, n)
    :param xi: state noise, shape (N, T+1, n)

    :return: (x (N, T+1, n), u (N, T, m), y (N, T+1, p))
    """
    dyn = as_dynamics(world)
    policy = _as_policy(policy)
    encoder = encoder or ObsEncoder("raw")
    n, m = dyn.state_dim, dyn.input_dim
    batch = x0.shape[0]
    x = np.zeros((batch, T + 1, n))
    u = np.zeros((batch, T, m))
    x[:, 0] = x0
    for t in range(T):
        u_t = np.asarray(policy(encoder.encode(x[:, t] + xi[:, t])), dtype=np.float64)
        if u_t.reshape(batch, -1).shape[1] != m:
            raise ShapeError("policy returned {} inputs, system expects {}".format(u_t.shape, m))
        u[:, t] = u_t.reshape(batch, m)
        x[:, t + 1] = dyn.step(x[:, t], u[:, t])
    return x, u, encoder.encode(x + xi)


def rollout_expert_batch(world, expert, x0: np.ndarray, T: int) -> tuple:
    """Noise-free expert closed loop on the true states.

    :return: (x (N, T+1, n), u (N, T, m))
    """
    dyn = as_dynamics(world)
    expert = _as_policy(expert)
    batch = x0.shape[0]
    x = np.zeros((batch, T + 1, dyn.state_dim))
    u = np.zeros((batch, T, dyn.input_dim))
    x[:, 0] = x0
    for t in range(T):
        u[:, t] = np.asarray(expert(x[:, t]), dtype=np.float64).reshape(batch, dyn.input_dim)
        x[:, t + 1] = dyn.step(x[:, t], u[:, t])
    return x, u


def check_coverage(dataset: TrajectoryDataset, H: int) -> CoverageReport:
    """Smallest eigenvalue of the pooled state Gram matrix over t = 0..T-H.

    Reads the TRUE states. The Gram matrix is normalized by the number of
    pooled samples.

    :param TrajectoryDataset dataset: expert data
    :param int H: prediction horizon
    """
    if dataset is None or len(dataset) == 0:
        raise ValueError("coverage of an empty dataset is undefined")
    if dataset.T < H:
        raise ValueError("trajectory length {} is shorter than horizon {}".format(dataset.T, H))
    states = dataset.x[:, : dataset.T - H + 1, :].reshape(-1, dataset.meta["n"])
    gram = states.T @ states / states.shape[0]
    phi_x = max(0.0, float(sla.eigvalsh(gram)[0]))
    return CoverageReport(phi_x=phi_x, H=H, n_samples=states.shape[0])


def _as_policy(K):
    """Coerce a gain, a matrix or a callable to a batch-capable policy."""
    if isinstance(K, FeedbackGain):
        return K.policy()
    if callable(K):
        return K
    return LinearPolicy(K)


def as_dynamics(world) -> DynamicsFn:
    """Known dynamics of an LtiSystem, or the DynamicsFn itself."""
    if isinstance(world, LtiSystem):
        return world.as_dynamics()
    if isinstance(world, DynamicsFn):
        return world
    raise TypeError("expected an LtiSystem or a DynamicsFn, not {}".format(type(world)))
