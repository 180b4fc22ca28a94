# -*- coding: utf-8 -*-
#! python3

"""
    Linear system driven by a frozen random MLP expert: network BC, rollout and
    PIL training for several prediction horizons.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging

# submodules
from pil_lab.evaluation.eval_metrics import max_discrepancy, write_plot_data
from pil_lab.experiments.runner import collect, mean_half_std, result_row, run_seeds, train_network, write_results
from pil_lab.learners.pil_nn import deploy_policy
from pil_lab.numkit.noise import NoiseModel, RngStream
from pil_lab.utils.config import ExperimentConfig
from pil_lab.worlds.dynamics import ObsEncoder
from pil_lab.worlds.lti_world import reference_system
from pil_lab.worlds.nonlinear_world import generate_nonlinear_dataset, mlp_expert_linear

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

EXPERIMENT = "lin-pred-order"

# #############################################################################
# ########## Functions #############
# ##################################


def _seed_rows(seed: int, values: dict, config_hash: str) -> list:
    sys = reference_system()
    dyn = sys.as_dynamics()
    encoder = ObsEncoder("raw")
    data_cfg, eval_cfg = values["data"], values["eval"]
    data_rng, init_rng, batch_rng, test_rng = RngStream(seed).spawn(4)

    expert = mlp_expert_linear(sys, seed, hidden=tuple(values["expert"]["hidden"]))
    x0_model = NoiseModel.gaussian(data_cfg["x0_var"], dim=sys.n)
    xi_model = NoiseModel.uniform(data_cfg["noise_bound"], dim=sys.n)
    eta_model = NoiseModel.uniform(data_cfg["noise_bound"], dim=sys.m)
    data = generate_nonlinear_dataset(
        dyn, expert, data_cfg["n_traj"], data_cfg["T"], x0_model, xi_model, eta_model, encoder, data_rng
    )

    def _run(mode, H):
        model, _ = train_network(data, dyn, encoder, mode, H, values["train"], init_rng.clone(), batch_rng.clone())
        result = max_discrepancy(
            dyn,
            expert,
            deploy_policy(model, encoder),
            eval_cfg["n_test"],
            eval_cfg["T"],
            x0_model,
            xi_model,
            test_rng.clone(),
            encoder,
        )
        logger.debug("Seed {} {} H={}: discrepancy {:.5f}".format(seed, mode, H, result.mean))
        return [
            result_row(EXPERIMENT, mode, H, seed, "discrepancy_mean", result.mean, config_hash),
            result_row(EXPERIMENT, mode, H, seed, "discrepancy_half_std", result.half_std, config_hash),
        ]

    rows = []
    methods = values["methods"]
    if "bc" in methods:
        # BC ignores the horizon: one fit per seed
        rows += _run("bc", 1)
    for H in values["horizons"]:
        for mode in ("rollout", "pil"):
            if mode in methods:
                rows += _run(mode, H)
    return rows


def run_lin_pred_order(config: ExperimentConfig) -> dict:
    """Run every seed and write ``results.csv`` plus the discrepancy-vs-H plot file."""
    values = config.values
    per_seed = run_seeds(_seed_rows, config.seeds, values, config.config_hash)
    rows = [row for seed_rows in per_seed for row in seed_rows]
    out_dir = config.output_dir
    outputs = {"results": write_results(out_dir / "results.csv", rows)}

    horizons = values["horizons"]
    series = {}
    for mode in values["methods"]:
        stats = [
            mean_half_std(collect(rows, "discrepancy_mean", mode, 1 if mode == "bc" else H)) for H in horizons
        ]
        series[mode] = ([s[0] for s in stats], [s[1] for s in stats])
    outputs["plot"] = write_plot_data(out_dir / "plot_discrepancy.csv", "H", horizons, series, config.config_hash)
    return outputs
