# -*- coding: utf-8 -*-
#! python3

"""
    Pendulum swing-up: five training variants, with and without measurement
    noise, compared by trajectory discrepancy and episode return.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# submodules
from pil_lab.evaluation.eval_metrics import episode_return, max_discrepancy, write_plot_data
from pil_lab.experiments.runner import collect, mean_half_std, result_row, run_seeds, train_network, write_results
from pil_lab.learners.pil_nn import deploy_policy
from pil_lab.numkit.noise import NoiseModel, RngStream
from pil_lab.utils.config import ExperimentConfig
from pil_lab.worlds.dynamics import ObsEncoder
from pil_lab.worlds.nonlinear_world import (
    PendulumExpert,
    PendulumParams,
    generate_nonlinear_dataset,
    pendulum_dynamics,
    pendulum_noise_models,
    pendulum_x0_model,
)

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

EXPERIMENT = "pendulum"
NOGRAD_SUFFIX = "_nograd"

# #############################################################################
# ########## Functions #############
# ##################################


def split_method(method: str) -> tuple:
    """``pil_nograd`` -> (``pil``, False); ``rollout`` -> (``rollout``, True)."""
    if method.endswith(NOGRAD_SUFFIX):
        return method[: -len(NOGRAD_SUFFIX)], False
    return method, True


def case_noise(case: str, noise_cfg: dict) -> tuple:
    """(xi_model, eta_model, bounds) of a ``clean`` or ``noisy`` case."""
    if case == "clean":
        return NoiseModel.none(2), NoiseModel.none(1), {}
    return pendulum_noise_models(noise_cfg["angle_deg"], noise_cfg["rate_deg"], noise_cfg["input"])


def _seed_rows(seed: int, values: dict, config_hash: str) -> list:
    params = PendulumParams(**values["pendulum"])
    dyn = pendulum_dynamics(params)
    expert = PendulumExpert(params)
    encoder = ObsEncoder("trig_angle", angle_index=0)
    x0_model = pendulum_x0_model()
    data_cfg, eval_cfg = values["data"], values["eval"]
    rows = []

    cases = values["cases"]
    for case, case_rng in zip(cases, RngStream(seed).spawn(len(cases))):
        data_rng, init_rng, batch_rng, test_rng = case_rng.spawn(4)
        xi_model, eta_model, bounds = case_noise(case, values["noise"])
        data = generate_nonlinear_dataset(
            dyn, expert, data_cfg["n_traj"], data_cfg["T"], x0_model, xi_model, eta_model, encoder, data_rng, bounds
        )
        for method in values["methods"]:
            mode, with_gradient = split_method(method)
            model, _ = train_network(
                data,
                dyn,
                encoder,
                mode,
                values["H"],
                values["train"],
                init_rng.clone(),
                batch_rng.clone(),
                dynamics_gradient=with_gradient,
            )
            policy = deploy_policy(model, encoder)
            args = (eval_cfg["n_test"], eval_cfg["T"])
            gap = max_discrepancy(dyn, expert, policy, *args, x0_model, xi_model, test_rng.clone(), encoder)
            ret = episode_return(dyn, policy, *args, test_rng.clone(), expert, x0_model, xi_model, encoder)
            name = "{}/{}".format(method, case)
            H = 1 if mode == "bc" else values["H"]
            rows += [
                result_row(EXPERIMENT, name, H, seed, "discrepancy_mean", gap.mean, config_hash),
                result_row(EXPERIMENT, name, H, seed, "discrepancy_half_std", gap.half_std, config_hash),
                result_row(EXPERIMENT, name, H, seed, "return_mean", ret.mean, config_hash),
                result_row(EXPERIMENT, name, H, seed, "return_ratio", ret.ratio, config_hash),
            ]
            logger.info(
                "Seed {} {}: discrepancy {:.4f}, return ratio {:.3f}".format(seed, name, gap.mean, ret.ratio)
            )
    return rows


def run_pendulum(config: ExperimentConfig) -> dict:
    """Run every seed; write ``results.csv`` and the method x case table ``table.csv``."""
    values = config.values
    per_seed = run_seeds(_seed_rows, config.seeds, values, config.config_hash)
    rows = [row for seed_rows in per_seed for row in seed_rows]
    out_dir = config.output_dir
    outputs = {"results": write_results(out_dir / "results.csv", rows)}

    methods = values["methods"]
    series = {}
    for case in values["cases"]:
        means, half_stds = [], []
        for method in methods:
            H = 1 if split_method(method)[0] == "bc" else values["H"]
            mean, half_std = mean_half_std(collect(rows, "discrepancy_mean", "{}/{}".format(method, case), H))
            means.append(mean)
            half_stds.append(half_std)
        series[case] = (means, half_stds)
    outputs["table"] = write_plot_data(out_dir / "table.csv", "method", methods, series, config.config_hash)
    return outputs
