# -*- coding: utf-8 -*-
#! python3

"""
    Evaluation of learned policies against their expert.

    - maximum trajectory discrepancy on paired rollouts (same x0);
    - pendulum episode returns, normalized by the expert's;
    - empirical error scaling of the linear estimators against sample count
      and state noise level;
    - Monte Carlo estimate of the noise terms of one-step PIL and BC.
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
from pil_lab.learners.linear_learners import (
    LossWeightsLinear,
    PredictorSetLinear,
    compare_pil_bc,
    fit_bc,
    fit_pil_fixed_G,
    fit_pil_h1,
)
from pil_lab.numkit.linalg import as_mat, spectral_norm
from pil_lab.numkit.noise import NoiseModel, RngStream, sample_noise
from pil_lab.reporters.csv_reporter import CsvReporter
from pil_lab.worlds.dynamics import ObsEncoder
from pil_lab.worlds.lti_world import (
    LtiSystem,
    as_dynamics,
    generate_expert_dataset,
    rollout_expert_batch,
    rollout_learned_batch,
)

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

ESTIMATORS = ("fit_pil_fixed_G", "fit_bc", "fit_pil_h1")
# pendulum cost weights: angle, rate, torque
REWARD_WEIGHTS = (1.0, 0.1, 0.001)
FLOAT_NOISE_LEVEL = 1e-7
# steps per pooled scan trajectory
SEGMENT_LENGTH = 8

# #############################################################################
# ########## Classes ###############
# ##################################


@dataclass
class DiscrepancyResult:
    """Per test trajectory max_t |x_t^exp - x_t|, and its aggregates."""

    per_trajectory: list
    mean: float = field(init=False)
    std: float = field(init=False)
    half_std: float = field(init=False)
    n_test: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.per_trajectory, dtype=np.float64)
        self.per_trajectory = [float(v) for v in values]
        self.n_test = len(self.per_trajectory)
        self.mean = float(values.mean()) if self.n_test else float("nan")
        self.std = float(values.std()) if self.n_test else float("nan")
        self.half_std = 0.5 * self.std


@dataclass
class EpisodeReturn:
    """Mean episode return of a policy and of the expert on the same episodes."""

    returns: list
    expert_returns: list
    mean: float = field(init=False)
    expert_mean: float = field(init=False)
    ratio: float = field(init=False)

    def __post_init__(self):
        self.mean = float(np.mean(self.returns))
        self.expert_mean = float(np.mean(self.expert_returns))
        if self.expert_mean == 0.0:
            self.ratio = 1.0 if self.mean == 0.0 else float("inf")
        else:
            self.ratio = self.mean / self.expert_mean


@dataclass
class ScalingFit:
    """Mean gain error over a (sample count, state noise) grid and its fits.

    ``slope`` and ``intercept`` come from the log-log regression of the
    noise-free column; ``kappa1`` = exp(intercept). ``plateaus`` holds the
    largest-T error of each noise level, ``kappa2`` its ratio to the noise level.
    """

    estimator: str
    T_eff: list
    sigma_levels: list
    mean_errors: dict
    slope: float = None
    intercept: float = None
    residuals: list = field(default_factory=list)
    plateaus: dict = field(default_factory=dict)
    std_errors: dict = field(default_factory=dict)

    @property
    def kappa1(self) -> float:
        return None if self.intercept is None else float(np.exp(self.intercept))

    @property
    def kappa2(self) -> dict:
        return {s: p / s for s, p in self.plateaus.items() if s > 0}

    def plateau_ratios(self) -> list:
        """Plateau ratio between consecutive nonzero noise levels."""
        levels = sorted(s for s in self.plateaus if s > 0)
        return [
            (lo, hi, self.plateaus[hi] / self.plateaus[lo]) for lo, hi in zip(levels[:-1], levels[1:])
        ]


@dataclass
class OmegaStats:
    """Monte Carlo means of |omega_pil| and |omega_bc| with the sufficient condition."""

    mean_pil: float
    mean_bc: float
    lhs: float
    rhs: float
    condition_holds: bool
    n_datasets: int


# #############################################################################
# ########## Functions #############
# ##################################


def _paired_draws(dim: int, n_test: int, T: int, x0_model: NoiseModel, xi_model: NoiseModel, rng: RngStream):
    """One child stream per test trajectory: x0 then the measurement noise."""
    x0 = np.zeros((n_test, dim))
    xi = np.zeros((n_test, T + 1, dim))
    for k, child in enumerate(rng.spawn(n_test)):
        x0[k] = sample_noise(x0_model, dim, child)
        xi[k] = sample_noise(xi_model, dim, child, size=T + 1)
    return x0, xi


def max_discrepancy(
    world,
    expert,
    learned,
    n_test: int,
    T: int,
    x0_model: NoiseModel,
    xi_model: NoiseModel,
    rng: RngStream,
    encoder: ObsEncoder = None,
) -> DiscrepancyResult:
    """Expected worst-case deviation between expert and learned closed loops.

    The expert acts on true states, the learned policy on fresh noisy
    measurements; both start from the same x0. Angle coordinates are compared
    modulo 2 pi.

    :param world: :class:`LtiSystem` or :class:`DynamicsFn`
    :param expert: expert policy (gain or batch callable)
    :param learned: learned measurement feedback (gain or batch callable)
    :param int n_test: number of test trajectories
    :param int T: steps per trajectory
    """
    dyn = as_dynamics(world)
    x0, xi = _paired_draws(dyn.state_dim, n_test, T, x0_model, xi_model, rng)
    x_exp, _ = rollout_expert_batch(dyn, expert, x0, T)
    x_hat, _, _ = rollout_learned_batch(dyn, learned, x0, T, xi, encoder)
    gaps = np.linalg.norm(dyn.difference(x_exp, x_hat), axis=2)
    return DiscrepancyResult(per_trajectory=list(gaps.max(axis=1)))


def discrepancy_ratio(learned: DiscrepancyResult, reference: DiscrepancyResult) -> float:
    """Ratio of mean discrepancies, e.g. PIL relative to BC on one seed."""
    return learned.mean / reference.mean


def pendulum_reward(dyn, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """-(theta^2 + 0.1 theta_dot^2 + 0.001 u^2) per step, theta wrapped, torque clipped."""
    x = dyn.wrap(x)
    limit = dyn.params.get("torque_limit")
    if limit is not None:
        u = np.clip(u, -limit, limit)
    w_theta, w_rate, w_u = REWARD_WEIGHTS
    return -(w_theta * x[..., 0] ** 2 + w_rate * x[..., 1] ** 2 + w_u * np.sum(u ** 2, axis=-1))


def episode_return(
    dyn,
    policy,
    n_test: int,
    T: int,
    rng: RngStream,
    expert,
    x0_model: NoiseModel,
    xi_model: NoiseModel = None,
    encoder: ObsEncoder = None,
) -> EpisodeReturn:
    """Mean summed reward over ``n_test`` episodes of T steps, policy vs expert.

    Both run from the same x0 draws; the policy sees measurements with the
    same noise draws, the expert the true state.
    """
    xi_model = xi_model or NoiseModel.none(dyn.state_dim)
    x0, xi = _paired_draws(dyn.state_dim, n_test, T, x0_model, xi_model, rng)
    x_pol, u_pol, _ = rollout_learned_batch(dyn, policy, x0, T, xi, encoder)
    x_exp, u_exp = rollout_expert_batch(dyn, expert, x0, T)
    returns = pendulum_reward(dyn, x_pol[:, :T], u_pol).sum(axis=1)
    expert_returns = pendulum_reward(dyn, x_exp[:, :T], u_exp).sum(axis=1)
    return EpisodeReturn(returns=list(returns), expert_returns=list(expert_returns))


def scaling_scan(
    sys: LtiSystem,
    K_star,
    G_star: PredictorSetLinear,
    sigma_xi_levels: list,
    T_grid: list,
    seeds: list,
    estimator: str = "fit_pil_fixed_G",
    sigma_eta: float = 0.01,
    weights: LossWeightsLinear = None,
    segment: int = SEGMENT_LENGTH,
) -> ScalingFit:
    """Mean spectral-norm error |K_hat - K*| over a grid of sample counts and noise levels.

    Sample count T is realized by pooling T // segment expert trajectories of
    ``segment`` steps from x0 ~ N(0, I); the abscissa is
    T_eff = n_traj (segment - H + 1).

    :param list sigma_xi_levels: state noise variances (Sxi = sigma I)
    :param list T_grid: strictly increasing sample counts, multiples of ``segment``
    :param list seeds: one dataset per seed and cell
    :param str estimator: one of ``fit_pil_fixed_G``, ``fit_bc``, ``fit_pil_h1``
    :param float sigma_eta: input noise variance
    :param LossWeightsLinear weights: PIL weights (fixed-G and H=1 estimators)
    """
    if estimator not in ESTIMATORS:
        raise ValueError("estimator must be one of {}, not '{}'".format(ESTIMATORS, estimator))
    T_grid = [int(T) for T in T_grid]
    if len(T_grid) < 2 or any(b <= a for a, b in zip(T_grid[:-1], T_grid[1:])):
        raise ValueError("T grid must hold at least two strictly increasing values: {}".format(T_grid))
    if T_grid[0] < segment or not sigma_xi_levels or not seeds:
        raise ValueError("degenerate scaling grid (T >= segment, noise levels and seeds required)")
    weights = weights or LossWeightsLinear(np.eye(sys.n), np.eye(sys.m), np.eye(sys.n), H=1)
    K_star = as_mat(getattr(K_star, "K", K_star), "K*")
    H = weights.H
    if segment <= H:
        raise ValueError("segment length {} must exceed horizon {}".format(segment, H))

    x0_model = NoiseModel.gaussian(np.eye(sys.n))
    eta_model = NoiseModel.gaussian(sigma_eta, dim=sys.m)
    T_eff = [(T // segment) * (segment - H + 1) for T in T_grid]
    mean_errors, std_errors = {}, {}
    for i_s, sigma in enumerate(sigma_xi_levels):
        xi_model = NoiseModel.gaussian(float(sigma), dim=sys.n)
        column, spread = [], []
        for i_t, T in enumerate(T_grid):
            errors = []
            for seed in seeds:
                cell = RngStream(seed).spawn(len(sigma_xi_levels) * len(T_grid))[
                    i_s * len(T_grid) + i_t
                ]
                data = generate_expert_dataset(
                    sys, K_star, T // segment, segment, x0_model, xi_model, eta_model, cell
                )
                K_hat = _run_estimator(estimator, data, sys, G_star, weights)
                errors.append(spectral_norm(K_hat - K_star))
            column.append(float(np.mean(errors)))
            spread.append(float(np.std(errors)))
        mean_errors[float(sigma)] = column
        std_errors[float(sigma)] = spread
        logger.info("Scaling scan {} sigma_xi={}: {}".format(estimator, sigma, column))

    fit = ScalingFit(
        estimator=estimator,
        T_eff=T_eff,
        sigma_levels=[float(s) for s in sigma_xi_levels],
        mean_errors=mean_errors,
        std_errors=std_errors,
        plateaus={s: col[-1] for s, col in mean_errors.items()},
    )
    if 0.0 in mean_errors:
        errors = np.asarray(mean_errors[0.0])
        if np.max(errors) < FLOAT_NOISE_LEVEL:
            logger.info("Noise-free errors at float level, slope fit skipped")
        else:
            x, y = np.log(T_eff), np.log(errors)
            slope, intercept = np.polyfit(x, y, 1)
            fit.slope, fit.intercept = float(slope), float(intercept)
            fit.residuals = [float(r) for r in y - (slope * x + intercept)]
    return fit


def _run_estimator(name: str, data, sys: LtiSystem, G_star: PredictorSetLinear, w: LossWeightsLinear):
    if name == "fit_bc":
        return fit_bc(data).K
    if name == "fit_pil_h1":
        return fit_pil_h1(data, sys, w.Q, w.R).K
    return fit_pil_fixed_G(data, sys, G_star, w).K


def omega_monte_carlo(
    sys: LtiSystem,
    K,
    Q,
    R,
    sigma_xi,
    sigma_eta,
    n_datasets: int,
    n_traj: int,
    T: int,
    rng: RngStream,
    x0_model: NoiseModel = None,
) -> OmegaStats:
    """Mean |omega_pil| and |omega_bc| over independently drawn Gaussian-noise datasets."""
    x0_model = x0_model or NoiseModel.gaussian(np.eye(sys.n))
    xi_model = NoiseModel.gaussian(sigma_xi, dim=sys.n)
    eta_model = NoiseModel.gaussian(sigma_eta, dim=sys.m)
    norms_pil, norms_bc = [], []
    report = None
    for child in rng.spawn(n_datasets):
        data = generate_expert_dataset(sys, K, n_traj, T, x0_model, xi_model, eta_model, child)
        report = compare_pil_bc(data, sys, Q, R, xi_model.covariance, eta_model.covariance)
        norms_pil.append(report.omega_pil_norm)
        norms_bc.append(report.omega_bc_norm)
    return OmegaStats(
        mean_pil=float(np.mean(norms_pil)),
        mean_bc=float(np.mean(norms_bc)),
        lhs=report.lhs,
        rhs=report.rhs,
        condition_holds=report.condition_holds,
        n_datasets=n_datasets,
    )


def write_plot_data(
    csvpath: Path, x_name: str, x_values: list, series: dict, config_hash: str
) -> Path:
    """Plot-ready CSV: x grid, then ``<method>_mean`` and ``<method>_half_std`` per method.

    :param dict series: method -> (means, half_stds), aligned with ``x_values``
    """
    headers = [x_name]
    for method in series:
        headers += ["{}_mean".format(method), "{}_half_std".format(method)]
    headers.append("config_hash")
    reporter = CsvReporter(csvpath=Path(csvpath), headers=headers)
    rows = []
    for i, x in enumerate(x_values):
        row = {x_name: x, "config_hash": config_hash}
        for method, (means, half_stds) in series.items():
            row["{}_mean".format(method)] = means[i]
            row["{}_half_std".format(method)] = half_stds[i]
        rows.append(row)
    reporter.add_multiple(rows)
    logger.info("Plot data written: {}".format(csvpath))
    return csvpath
