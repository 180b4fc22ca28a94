# -*- coding: utf-8 -*-
#! python3

"""
    Linear system with an LQR expert: closed-form BC against PIL with fixed
    OLS predictors, for a grid of horizons, under high state noise and under
    high input noise.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# 3rd party library
import numpy as np

# submodules
from pil_lab.evaluation.eval_metrics import discrepancy_ratio, max_discrepancy, write_plot_data
from pil_lab.experiments.runner import collect, mean_half_std, result_row, run_seeds, write_results
from pil_lab.learners.linear_learners import (
    LossWeightsLinear,
    fit_bc,
    fit_pil_fixed_G,
    fit_predictors_ols,
)
from pil_lab.numkit.noise import NoiseModel, RngStream
from pil_lab.utils.config import ExperimentConfig
from pil_lab.worlds.lti_world import reference_system, generate_expert_dataset, lqr_gain

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

EXPERIMENT = "lin-noise-sweep"

# #############################################################################
# ########## Functions #############
# ##################################


def _seed_rows(seed: int, values: dict, config_hash: str) -> list:
    sys = reference_system()
    expert = lqr_gain(sys, values["expert"]["Qc"] * np.eye(sys.n), values["expert"]["Rc"] * np.eye(sys.m))
    data_cfg, pil_cfg, eval_cfg = values["data"], values["pil"], values["eval"]
    x0_model = NoiseModel.gaussian(data_cfg["x0_var"], dim=sys.n)
    rows = []

    cases = list(values["cases"].items())
    for (case, noise), case_rng in zip(cases, RngStream(seed).spawn(len(cases))):
        data_rng, test_rng = case_rng.spawn(2)
        xi_model = NoiseModel.gaussian(noise["xi_var"], dim=sys.n)
        eta_model = NoiseModel.gaussian(noise["eta_var"], dim=sys.m)
        data = generate_expert_dataset(
            sys, expert, data_cfg["n_traj"], data_cfg["T"], x0_model, xi_model, eta_model, data_rng
        )

        def _evaluate(gain):
            return max_discrepancy(
                sys, expert, gain, eval_cfg["n_test"], eval_cfg["T"], x0_model, xi_model, test_rng.clone()
            )

        bc = _evaluate(fit_bc(data))
        bc_name = "bc/{}".format(case)
        rows.append(result_row(EXPERIMENT, bc_name, "", seed, "discrepancy_mean", bc.mean, config_hash))
        rows.append(result_row(EXPERIMENT, bc_name, "", seed, "discrepancy_half_std", bc.half_std, config_hash))

        for H in values["horizons"]:
            G = fit_predictors_ols(data, H, ridge=pil_cfg["ridge"])
            w = LossWeightsLinear(
                pil_cfg["Q"] * np.eye(sys.n),
                pil_cfg["R"] * np.eye(sys.m),
                pil_cfg["P"] * np.eye(sys.n),
                H=H,
                alpha=pil_cfg["alpha"],
            )
            pil = _evaluate(fit_pil_fixed_G(data, sys, G, w))
            name = "pil/{}".format(case)
            rows.append(result_row(EXPERIMENT, name, H, seed, "discrepancy_mean", pil.mean, config_hash))
            rows.append(result_row(EXPERIMENT, name, H, seed, "discrepancy_half_std", pil.half_std, config_hash))
            rows.append(result_row(EXPERIMENT, name, H, seed, "ratio_to_bc", discrepancy_ratio(pil, bc), config_hash))
        logger.debug("Seed {} case {} done".format(seed, case))
    return rows


def run_lin_noise_sweep(config: ExperimentConfig) -> dict:
    """Run every seed and write ``results.csv`` plus one ratio-vs-H plot file per case.

    :return: output paths by name
    """
    values = config.values
    per_seed = run_seeds(_seed_rows, config.seeds, values, config.config_hash)
    rows = [row for seed_rows in per_seed for row in seed_rows]
    out_dir = config.output_dir
    outputs = {"results": write_results(out_dir / "results.csv", rows)}

    horizons = values["horizons"]
    for case in values["cases"]:
        stats = [mean_half_std(collect(rows, "ratio_to_bc", "pil/{}".format(case), H)) for H in horizons]
        series = {"pil_over_bc": ([s[0] for s in stats], [s[1] for s in stats])}
        outputs["plot_" + case] = write_plot_data(
            out_dir / "plot_{}.csv".format(case), "H", horizons, series, config.config_hash
        )
        logger.info(
            "{}: PIL/BC discrepancy ratio by H {}".format(
                case, ", ".join("{}={:.3f}".format(H, s[0]) for H, s in zip(horizons, stats))
            )
        )
    return outputs
