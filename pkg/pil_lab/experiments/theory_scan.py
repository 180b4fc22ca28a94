# -*- coding: utf-8 -*-
#! python3

"""
    Empirical checks of the linear error bounds: gain error against sample
    count and state noise level, and Monte Carlo noise terms of one-step PIL
    against BC for several noise ratios.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import math

# 3rd party library
import numpy as np

# submodules
from pil_lab.evaluation.eval_metrics import omega_monte_carlo, scaling_scan, write_plot_data
from pil_lab.experiments.runner import result_row, write_results
from pil_lab.learners.linear_learners import LossWeightsLinear, PredictorSetLinear
from pil_lab.numkit.noise import RngStream
from pil_lab.reporters.csv_reporter import CsvReporter
from pil_lab.utils.config import ExperimentConfig
from pil_lab.worlds.lti_world import reference_system, lqr_gain

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

EXPERIMENT = "theory-scan"
OMEGA_HEADERS = [
    "std_ratio",
    "sigma_xi",
    "sigma_eta",
    "mean_pil",
    "mean_bc",
    "pil_le_bc",
    "lhs",
    "rhs",
    "condition_holds",
    "n_datasets",
    "seed",
    "config_hash",
]

# #############################################################################
# ########## Functions #############
# ##################################


def run_theory_scan(config: ExperimentConfig) -> dict:
    """Scaling scan over the seed list, then the noise-term Monte Carlo on the first seed.

    Writes ``results.csv``, ``scaling.csv`` (mean error per T_eff and noise
    level) and ``omega.csv``.
    """
    values = config.values
    scan, omega = values["scan"], values["omega"]
    config_hash = config.config_hash
    out_dir = config.output_dir
    sys = reference_system()
    expert = lqr_gain(sys, values["expert"]["Qc"] * np.eye(sys.n), values["expert"]["Rc"] * np.eye(sys.m))

    H = scan["H"]
    weights = LossWeightsLinear(
        scan["Q"] * np.eye(sys.n), scan["R"] * np.eye(sys.m), scan["P"] * np.eye(sys.n), H=H, alpha=1.0
    )
    true_predictors = PredictorSetLinear.from_closed_loop(sys.closed_loop(expert.K), H)
    fit = scaling_scan(
        sys,
        expert,
        true_predictors,
        scan["sigma_xi_levels"],
        scan["T_grid"],
        config.seeds,
        estimator=scan["estimator"],
        sigma_eta=scan["sigma_eta"],
        weights=weights,
        segment=scan["segment"],
    )

    method = scan["estimator"]
    rows = []
    for name, value in (("slope", fit.slope), ("intercept", fit.intercept), ("kappa1", fit.kappa1)):
        if value is not None:
            rows.append(result_row(EXPERIMENT, method, H, "all", name, value, config_hash))
    for sigma, kappa2 in sorted(fit.kappa2.items()):
        rows.append(result_row(EXPERIMENT, method, H, "all", "kappa2@{!r}".format(sigma), kappa2, config_hash))
    for lo, hi, ratio in fit.plateau_ratios():
        rows.append(
            result_row(EXPERIMENT, method, H, "all", "plateau_ratio@{!r}->{!r}".format(lo, hi), ratio, config_hash)
        )
    if fit.slope is not None:
        logger.info("Noise-free error slope {:.3f} (kappa1={:.4g})".format(fit.slope, fit.kappa1))

    series = {
        "sigma_{!r}".format(s): (fit.mean_errors[s], [0.5 * e for e in fit.std_errors[s]])
        for s in fit.sigma_levels
    }
    outputs = {
        "scaling": write_plot_data(out_dir / "scaling.csv", "T_eff", fit.T_eff, series, config_hash)
    }

    # noise terms: sigma_xi set from the std ratio, sigma_eta fixed
    seed = config.seeds[0]
    ratios = omega["std_ratios"]
    var_eta = omega["sigma_eta"]
    reporter = CsvReporter(csvpath=out_dir / "omega.csv", headers=OMEGA_HEADERS)
    omega_rows = []
    for ratio, rng in zip(ratios, RngStream(seed).spawn(len(ratios))):
        var_xi = (ratio * math.sqrt(var_eta)) ** 2
        stats = omega_monte_carlo(
            sys,
            expert,
            omega["Q"] * np.eye(sys.n),
            omega["R"] * np.eye(sys.m),
            var_xi,
            var_eta,
            omega["n_datasets"],
            omega["n_traj"],
            omega["T"],
            rng,
        )
        pil_le_bc = stats.mean_pil <= stats.mean_bc
        omega_rows.append(
            {
                "std_ratio": ratio,
                "sigma_xi": var_xi,
                "sigma_eta": var_eta,
                "mean_pil": stats.mean_pil,
                "mean_bc": stats.mean_bc,
                "pil_le_bc": pil_le_bc,
                "lhs": stats.lhs,
                "rhs": stats.rhs,
                "condition_holds": stats.condition_holds,
                "n_datasets": stats.n_datasets,
                "seed": seed,
                "config_hash": config_hash,
            }
        )
        name = "omega@{!r}".format(ratio)
        rows += [
            result_row(EXPERIMENT, name, 1, seed, "mean_pil", stats.mean_pil, config_hash),
            result_row(EXPERIMENT, name, 1, seed, "mean_bc", stats.mean_bc, config_hash),
            result_row(EXPERIMENT, name, 1, seed, "pil_le_bc", pil_le_bc, config_hash),
            result_row(EXPERIMENT, name, 1, seed, "condition_holds", stats.condition_holds, config_hash),
        ]
        logger.info(
            "Noise std ratio {}: mean |omega_pil|={:.4g}, mean |omega_bc|={:.4g}{}".format(
                ratio, stats.mean_pil, stats.mean_bc, "" if pil_le_bc else " (BC smaller)"
            )
        )
    reporter.add_multiple(omega_rows)
    outputs["omega"] = reporter.csvpath
    outputs["results"] = write_results(out_dir / "results.csv", rows)
    return outputs
