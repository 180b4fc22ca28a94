# -*- coding: utf-8 -*-
#! python3

"""
    Closed-form imitation learners for linear systems.

    All estimators read measurements only (y, v) and pool every trajectory of
    the dataset: sums run over each trajectory's valid time offsets.

    Conventions:

    - policies are u = K y, K is m x n;
    - predictors G_1..G_H map y_t to the predicted state at t + tau, G_0 = I;
    - decay weights d_tau = alpha^(tau - 1) multiply every term at offset tau.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
from dataclasses import dataclass, field
from pathlib import Path

# 3rd party library
import numpy as np

# submodules
from pil_lab.numkit.linalg import as_mat, check_psd, solve_linear, solve_right, spectral_norm
from pil_lab.reporters.csv_reporter import CsvReporter, read_csv_rows
from pil_lab.utils.errors import DatasetFormatError, ShapeError, SingularMatrixError
from pil_lab.worlds.dataset import (
    ObservationView,
    TrajectoryDataset,
    read_metadata,
    write_metadata,
)
from pil_lab.worlds.lti_world import FeedbackGain, LtiSystem

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

LINEAR_MODEL_HEADERS = ["name", "tau", "row", "col", "value"]

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass
class PredictorSetLinear:
    """Multi-step transition matrices G_1..G_H (G_0 = I is implicit)."""

    G: list

    def __post_init__(self):
        self.G = [as_mat(g, "G_{}".format(tau + 1)) for tau, g in enumerate(self.G)]
        if not self.G:
            raise ValueError("a predictor set needs at least one matrix (H >= 1)")
        n = self.G[0].shape[0]
        for tau, g in enumerate(self.G, start=1):
            if g.shape != (n, n):
                raise ShapeError("G_{} must be {}x{}, got {}".format(tau, n, n, g.shape))

    @property
    def H(self) -> int:
        return len(self.G)

    @property
    def n(self) -> int:
        return self.G[0].shape[0]

    def at(self, tau: int) -> np.ndarray:
        """G_tau, with G_0 = I."""
        if tau == 0:
            return np.eye(self.n)
        return self.G[tau - 1]

    @classmethod
    def identity(cls, n: int, H: int) -> "PredictorSetLinear":
        return cls([np.eye(n) for _ in range(H)])

    @classmethod
    def from_closed_loop(cls, F, H: int) -> "PredictorSetLinear":
        """Powers F, F^2, ..., F^H of a closed-loop matrix."""
        F = as_mat(F, "F")
        return cls([np.linalg.matrix_power(F, tau) for tau in range(1, H + 1)])


class LossWeightsLinear(object):
    """Weights of the linear PIL objective.

    :param Q: n x n state prediction weight, PSD
    :param R: m x m input weight, PSD
    :param P: n x n consistency weight, PSD
    :param int H: prediction horizon
    :param float alpha: decay in (0, 1]
    """

    def __init__(self, Q, R, P, H: int = 1, alpha: float = 1.0):
        self.Q = check_psd(Q, "Q")
        self.R = check_psd(R, "R")
        self.P = check_psd(P, "P")
        if self.Q.shape != self.P.shape:
            raise ShapeError("Q {} and P {} must have the same shape".format(self.Q.shape, self.P.shape))
        if int(H) < 1:
            raise ValueError("horizon H must be at least 1, got {}".format(H))
        if not 0.0 < float(alpha) <= 1.0:
            raise ValueError("decay alpha must lie in (0, 1], got {}".format(alpha))
        self.H = int(H)
        self.alpha = float(alpha)

    def __repr__(self):
        return "LossWeightsLinear(H={}, alpha={})".format(self.H, self.alpha)

    def decay(self, tau: int) -> float:
        """d_tau = alpha^(tau - 1)."""
        return self.alpha ** (tau - 1)


@dataclass
class ComparisonReport:
    """Noise terms driving the BC and PIL (H=1) estimation errors."""

    omega_pil: np.ndarray
    omega_bc: np.ndarray
    lhs: float
    rhs: float
    condition_holds: bool
    omega_pil_norm: float = field(init=False)
    omega_bc_norm: float = field(init=False)

    def __post_init__(self):
        self.omega_pil_norm = spectral_norm(self.omega_pil)
        self.omega_bc_norm = spectral_norm(self.omega_bc)


# #############################################################################
# ########## Functions #############
# ##################################


def _observations(data) -> ObservationView:
    if isinstance(data, TrajectoryDataset):
        return data.observations()
    if isinstance(data, ObservationView):
        return data
    raise TypeError(
        "expected a TrajectoryDataset or an ObservationView, not {}".format(type(data))
    )


def _stack(arr: np.ndarray, start: int, count: int) -> np.ndarray:
    """Pool ``count`` consecutive steps from ``start`` over every trajectory."""
    return arr[:, start : start + count, :].reshape(-1, arr.shape[2])


def _check_horizon(obs: ObservationView, H: int):
    if obs.T < H:
        raise ValueError("trajectory length {} is shorter than horizon {}".format(obs.T, H))


def _check_system(obs: ObservationView, sys: LtiSystem):
    if obs.obs_dim != sys.n or obs.input_dim != sys.m:
        raise ShapeError(
            "data dimensions (n={}, m={}) do not match {}".format(obs.obs_dim, obs.input_dim, sys)
        )


def fit_predictors_ols(data, H: int, ridge: float = 0.0) -> PredictorSetLinear:
    """Least-squares multi-step predictors.

    G_tau = (sum_t y_{t+tau} y_t') (sum_t y_t y_t' + ridge I)^-1 with t = 0..T-tau.

    :param data: TrajectoryDataset or ObservationView
    :param int H: horizon
    :param float ridge: Tikhonov term added to the Gram matrix

    :raises SingularMatrixError: when the Gram matrix is singular (try ridge > 0)
    """
    obs = _observations(data)
    _check_horizon(obs, H)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative, got {}".format(ridge))
    n = obs.obs_dim
    G = []
    for tau in range(1, H + 1):
        count = obs.T - tau + 1
        y0 = _stack(obs.y, 0, count)
        ytau = _stack(obs.y, tau, count)
        gram = y0.T @ y0 + ridge * np.eye(n)
        try:
            G.append(solve_right(ytau.T @ y0, gram))
        except SingularMatrixError as err:
            raise SingularMatrixError(
                "state Gram matrix of offset {} is singular (rcond={:.3e}); "
                "the data lacks excitation, consider ridge > 0".format(tau, err.rcond),
                rcond=err.rcond,
            )
    logger.debug("OLS predictors fitted for H={} (ridge={})".format(H, ridge))
    return PredictorSetLinear(G)


def fit_bc(data) -> FeedbackGain:
    """Behavior cloning: K = (sum_t v_t y_t') (sum_t y_t y_t')^-1."""
    obs = _observations(data)
    y0 = _stack(obs.y, 0, obs.T)
    v0 = _stack(obs.v, 0, obs.T)
    K = solve_right(v0.T @ y0, y0.T @ y0)
    logger.debug("BC gain fitted on {} samples".format(y0.shape[0]))
    return FeedbackGain(K=K)


def fit_pil_fixed_G(
    data, sys: LtiSystem, G: PredictorSetLinear, w: LossWeightsLinear
) -> FeedbackGain:
    """PIL gain for fixed predictors, minimizing the R and P terms of the objective.

    K = (R + B'PB)^-1 [sum d_tau (R v_{t+tau-1} + B'P G_tau y_t - B'PA G_{tau-1} y_t)(G_{tau-1} y_t)']
        [sum d_tau (G_{tau-1} y_t)(G_{tau-1} y_t)']^-1, t = 0..T-H, tau = 1..H.

    :param data: TrajectoryDataset or ObservationView
    :param LtiSystem sys: known dynamics
    :param PredictorSetLinear G: predictors, at least ``w.H`` of them
    :param LossWeightsLinear w: weights
    """
    obs = _observations(data)
    _check_system(obs, sys)
    _check_horizon(obs, w.H)
    if G.H < w.H:
        raise ShapeError("{} predictors given, horizon is {}".format(G.H, w.H))
    A, B, R, P = sys.A, sys.B, w.R, w.P
    count = obs.T - w.H + 1
    y0 = _stack(obs.y, 0, count)

    numerator = np.zeros((sys.m, sys.n))
    denominator = np.zeros((sys.n, sys.n))
    for tau in range(1, w.H + 1):
        d = w.decay(tau)
        z_prev = y0 @ G.at(tau - 1).T
        z_tau = y0 @ G.at(tau).T
        v_prev = _stack(obs.v, tau - 1, count)
        target = v_prev @ R.T + z_tau @ (B.T @ P).T - z_prev @ (B.T @ P @ A).T
        numerator += d * target.T @ z_prev
        denominator += d * z_prev.T @ z_prev

    K = solve_linear(R + B.T @ P @ B, solve_right(numerator, denominator))
    return FeedbackGain(K=K)


def fit_pil_h1(data, sys: LtiSystem, Q, R) -> FeedbackGain:
    """One-step PIL with the predictor tied to the closed loop (G_1 = A + BK).

    K = (B'QB + R)^-1 [B'Q sum_t (y_{t+1} - A y_t) y_t' + R sum_t v_t y_t'] (sum_t y_t y_t')^-1
    """
    obs = _observations(data)
    _check_system(obs, sys)
    Q = check_psd(Q, "Q")
    R = check_psd(R, "R")
    A, B = sys.A, sys.B
    y0 = _stack(obs.y, 0, obs.T)
    y1 = _stack(obs.y, 1, obs.T)
    v0 = _stack(obs.v, 0, obs.T)
    rhs = B.T @ Q @ (y1 - y0 @ A.T).T @ y0 + R @ v0.T @ y0
    K = solve_linear(B.T @ Q @ B + R, solve_right(rhs, y0.T @ y0))
    return FeedbackGain(K=K)


def pil_linear_loss(data, sys: LtiSystem, K, G: PredictorSetLinear, w: LossWeightsLinear) -> float:
    """Linear PIL objective, t = 0..T-H:

    sum_t sum_tau d_tau ( |y_{t+tau} - G_tau y_t|_Q^2 + |v_{t+tau-1} - K G_{tau-1} y_t|_R^2
                          + |G_tau y_t - (A + BK) G_{tau-1} y_t|_P^2 )
    """
    obs = _observations(data)
    K = K.K if isinstance(K, FeedbackGain) else as_mat(K, "K")
    F = sys.closed_loop(K)
    count = obs.T - w.H + 1
    y0 = _stack(obs.y, 0, count)
    total = 0.0
    for tau in range(1, w.H + 1):
        z_prev = y0 @ G.at(tau - 1).T
        z_tau = y0 @ G.at(tau).T
        e_y = _stack(obs.y, tau, count) - z_tau
        e_v = _stack(obs.v, tau - 1, count) - z_prev @ K.T
        e_w = z_tau - z_prev @ F.T
        total += w.decay(tau) * (
            np.sum((e_y @ w.Q) * e_y) + np.sum((e_v @ w.R) * e_v) + np.sum((e_w @ w.P) * e_w)
        )
    return float(total)


def _predictor_step(obs, sys, K, G, w, tau) -> np.ndarray:
    """Exact minimizer of the objective in G_tau, other blocks held fixed."""
    count = obs.T - w.H + 1
    y0 = _stack(obs.y, 0, count)
    gram = y0.T @ y0
    F = sys.closed_loop(K)
    d = w.decay(tau)
    lhs = d * (w.Q + w.P)
    rhs = d * w.Q @ _stack(obs.y, tau, count).T @ y0 + d * w.P @ F @ G.at(tau - 1) @ gram
    if tau < w.H:
        d_next = w.decay(tau + 1)
        lhs = lhs + d_next * (K.T @ w.R @ K + F.T @ w.P @ F)
        rhs = rhs + d_next * (
            K.T @ w.R @ _stack(obs.v, tau, count).T @ y0 + F.T @ w.P @ G.at(tau + 1) @ gram
        )
    return solve_right(solve_linear(lhs, rhs), gram)


def fit_pil_alternating(
    data,
    sys: LtiSystem,
    w: LossWeightsLinear,
    max_iters: int = 100,
    tol: float = 1e-10,
    G_init: PredictorSetLinear = None,
) -> tuple:
    """Joint PIL fit of gain and predictors by block coordinate descent.

    Each iteration runs the gain step (:func:`fit_pil_fixed_G`), then sweeps
    tau = 1..H replacing G_tau by the exact minimizer of the full objective in
    G_tau. The objective is non-increasing across half-steps.

    :param data: TrajectoryDataset or ObservationView
    :param LtiSystem sys: known dynamics
    :param LossWeightsLinear w: weights
    :param int max_iters: iteration budget
    :param float tol: stop when the largest entry change of K and G is below it
    :param PredictorSetLinear G_init: starting predictors, identity by default

    :return: (FeedbackGain, PredictorSetLinear, info) where info holds
        ``losses`` (after every half-step), ``iterations`` and ``converged``
    """
    obs = _observations(data)
    _check_system(obs, sys)
    _check_horizon(obs, w.H)
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1, got {}".format(max_iters))
    G = G_init if G_init is not None else PredictorSetLinear.identity(sys.n, w.H)
    if G.H < w.H:
        raise ShapeError("{} initial predictors given, horizon is {}".format(G.H, w.H))
    G = PredictorSetLinear([g.copy() for g in G.G[: w.H]])

    losses = []
    best = None
    K = None
    converged = False
    iteration = 0
    for iteration in range(1, max_iters + 1):
        K_prev, G_prev = K, [g.copy() for g in G.G]

        K = fit_pil_fixed_G(obs, sys, G, w).K
        losses.append(pil_linear_loss(obs, sys, K, G, w))

        for tau in range(1, w.H + 1):
            G.G[tau - 1] = _predictor_step(obs, sys, K, G, w, tau)
        losses.append(pil_linear_loss(obs, sys, K, G, w))

        if best is None or losses[-1] <= best[0]:
            best = (losses[-1], K, PredictorSetLinear([g.copy() for g in G.G]))
        if K_prev is None:
            continue
        change = max(
            np.max(np.abs(K - K_prev)),
            max(np.max(np.abs(g - gp)) for g, gp in zip(G.G, G_prev)),
        )
        if change < tol:
            converged = True
            break

    if converged:
        logger.info("Alternating PIL converged in {} iterations".format(iteration))
    else:
        logger.warning(
            "Alternating PIL did not converge in {} iterations, returning best iterate".format(
                max_iters
            )
        )
    _, K, G = best
    info = {"losses": losses, "iterations": iteration, "converged": converged}
    return FeedbackGain(K=K), G, info


def compare_pil_bc(dataset: TrajectoryDataset, sys: LtiSystem, Q, R, sigma_xi, sigma_eta) -> ComparisonReport:
    """Noise terms of the one-step PIL and BC estimators.

    omega_pil = sum_t B'Q (xi_{t+1} - A xi_t) y_t', omega_bc = sum_t B'QB eta_t y_t',
    compared through |B'Q(I - A)| sqrt(tr Sxi) <= |B'QB| sqrt(tr Seta).
    R weights the estimators only and is validated for shape.

    :raises ValueError: when the dataset carries no noise records
    """
    if not isinstance(dataset, TrajectoryDataset) or not dataset.has_noise_records:
        raise ValueError("comparing PIL and BC needs a dataset with noise records (xi, eta)")
    obs = dataset.observations()
    _check_system(obs, sys)
    Q = check_psd(Q, "Q")
    R = check_psd(R, "R")
    if R.shape != (sys.m, sys.m):
        raise ShapeError("R must be {0}x{0}, got {1}".format(sys.m, R.shape))
    sigma_xi = check_psd(sigma_xi, "sigma_xi")
    sigma_eta = check_psd(sigma_eta, "sigma_eta")
    A, B = sys.A, sys.B
    T = dataset.T

    y0 = _stack(dataset.y, 0, T)
    xi0 = _stack(dataset.xi, 0, T)
    xi1 = _stack(dataset.xi, 1, T)
    eta0 = _stack(dataset.eta, 0, T)
    omega_pil = B.T @ Q @ (xi1 - xi0 @ A.T).T @ y0
    omega_bc = B.T @ Q @ B @ eta0.T @ y0
    lhs = spectral_norm(B.T @ Q @ (np.eye(sys.n) - A)) * np.sqrt(np.trace(sigma_xi))
    rhs = spectral_norm(B.T @ Q @ B) * np.sqrt(np.trace(sigma_eta))
    return ComparisonReport(
        omega_pil=omega_pil,
        omega_bc=omega_bc,
        lhs=float(lhs),
        rhs=float(rhs),
        condition_holds=bool(lhs <= rhs),
    )


# -- Serialization ------------------------------------------------------------
def write_linear_model(
    csvpath: Path, gain: FeedbackGain = None, predictors: PredictorSetLinear = None, meta: dict = None
) -> Path:
    """Write a gain and/or predictors as ``name,tau,row,col,value`` rows + metadata.

    The gain is stored under name ``K`` (tau empty), predictors under ``G``.
    """
    csvpath = Path(csvpath)
    reporter = CsvReporter(csvpath=csvpath, headers=LINEAR_MODEL_HEADERS)
    rows = []
    if gain is not None:
        rows += _matrix_rows("K", None, gain.K)
    if predictors is not None:
        for tau in range(1, predictors.H + 1):
            rows += _matrix_rows("G", tau, predictors.at(tau))
    reporter.add_multiple(rows)
    out = dict(meta or {})
    out.update(
        {
            "has_gain": gain is not None,
            "H": predictors.H if predictors is not None else 0,
        }
    )
    write_metadata(csvpath, out)
    logger.info("Linear model written: {}".format(csvpath))
    return csvpath


def read_linear_model(csvpath: Path) -> tuple:
    """Read back :func:`write_linear_model` output.

    :return: (FeedbackGain or None, PredictorSetLinear or None, meta)
    """
    csvpath = Path(csvpath)
    if not csvpath.is_file():
        raise DatasetFormatError("linear model file not found: {}".format(csvpath))
    meta = read_metadata(csvpath)
    headers, rows = read_csv_rows(csvpath)
    if headers != LINEAR_MODEL_HEADERS:
        raise DatasetFormatError("unexpected columns in {}: {}".format(csvpath, headers))

    blocks = {}
    try:
        for name, tau, row, col, value in rows:
            key = (name, int(tau) if tau else 0)
            blocks.setdefault(key, {})[(int(row), int(col))] = float(value)
    except ValueError as err:
        raise DatasetFormatError("malformed row in {}: {}".format(csvpath, err))

    def _matrix(cells):
        n_rows = 1 + max(r for r, _ in cells)
        n_cols = 1 + max(c for _, c in cells)
        mat = np.zeros((n_rows, n_cols))
        for (r, c), value in cells.items():
            mat[r, c] = value
        return mat

    gain = FeedbackGain(K=_matrix(blocks[("K", 0)])) if ("K", 0) in blocks else None
    H = int(meta.get("H", 0))
    predictors = None
    if H:
        try:
            predictors = PredictorSetLinear([_matrix(blocks[("G", tau)]) for tau in range(1, H + 1)])
        except KeyError as err:
            raise DatasetFormatError("predictor {} missing from {}".format(err, csvpath))
    return gain, predictors, meta


def _matrix_rows(name: str, tau, mat: np.ndarray) -> list:
    return [
        {"name": name, "tau": tau, "row": r, "col": c, "value": float(mat[r, c])}
        for r in range(mat.shape[0])
        for c in range(mat.shape[1])
    ]
