# -*- coding: utf-8 -*-
#! python3

"""
    Resumable three-stage pipeline: generate data, train, evaluate.

    Each stage only reads the artifacts written by the previous one, under
    ``<output_dir>/seed_<seed>/``:

    - ``dataset.csv`` + ``dataset.meta.json`` (gen-data);
    - ``model.csv`` + ``model.meta.json`` for closed-form methods, or
      ``model.json`` + ``training_log.csv`` for network methods (train);
    - ``<output_dir>/results.csv`` (eval).
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
from pathlib import Path

# 3rd party library
import numpy as np

# submodules
from pil_lab.evaluation.eval_metrics import episode_return, max_discrepancy
from pil_lab.experiments.runner import result_row, train_network, write_results
from pil_lab.learners.linear_learners import (
    LossWeightsLinear,
    fit_bc,
    fit_pil_alternating,
    fit_pil_fixed_G,
    fit_pil_h1,
    fit_predictors_ols,
    read_linear_model,
    write_linear_model,
)
from pil_lab.learners.pil_nn import PilModel, deploy_policy
from pil_lab.numkit.noise import NoiseModel, RngStream
from pil_lab.utils.config import ExperimentConfig
from pil_lab.utils.errors import ConfigError, DatasetFormatError
from pil_lab.worlds.dataset import read_dataset, read_metadata, write_dataset
from pil_lab.worlds.dynamics import ObsEncoder
from pil_lab.worlds.lti_world import FeedbackGain, LtiSystem, reference_system, generate_expert_dataset, lqr_gain
from pil_lab.worlds.nonlinear_world import (
    PendulumExpert,
    PendulumParams,
    RandomMlpExpert,
    generate_nonlinear_dataset,
    pendulum_dynamics,
    pendulum_x0_model,
)

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

EXPERIMENT = "pipeline"
CLOSED_FORM_METHODS = ("bc", "pil_fixed_G", "pil_h1", "pil_alternating")
NETWORK_PREFIX = "nn_"

DATASET_FILE = "dataset.csv"
LINEAR_MODEL_FILE = "model.csv"
CHECKPOINT_FILE = "model.json"
TRAINING_LOG_FILE = "training_log.csv"
RESULTS_FILE = "results.csv"

# #############################################################################
# ########## Functions #############
# ##################################


def seed_dir(config: ExperimentConfig, seed: int) -> Path:
    return config.output_dir / "seed_{}".format(seed)


def _streams(seed: int) -> tuple:
    """(data, train, eval) streams of a seed, independent of which stages run."""
    return tuple(RngStream(seed).spawn(3))


def _dynamics_from_meta(meta: dict):
    """(DynamicsFn, LtiSystem or None) rebuilt from dataset metadata."""
    dynamics = meta.get("dynamics") or {}
    name, params = dynamics.get("name"), dynamics.get("params") or {}
    if name == "lti":
        sys = LtiSystem(params["A"], params["B"])
        return sys.as_dynamics(), sys
    if name == "pendulum":
        return pendulum_dynamics(PendulumParams(**params)), None
    raise DatasetFormatError("unknown dynamics '{}' in dataset metadata".format(name))


def _expert_from_meta(meta: dict, dyn):
    expert = meta.get("expert") or {}
    if expert.get("kind") == "linear_gain":
        return FeedbackGain(K=np.asarray(expert["K"], dtype=np.float64))
    if expert.get("kind") == "pendulum_swingup_lqr":
        return PendulumExpert(PendulumParams(**dyn.params), swing_gain=expert["swing_gain"])
    if expert.get("kind") == "random_mlp" and "seed" in expert:
        return RandomMlpExpert.from_descriptor(expert)
    raise DatasetFormatError("cannot rebuild expert '{}' from metadata".format(expert.get("kind")))


def _check_method(values: dict):
    method = values["method"]
    if method in CLOSED_FORM_METHODS and values["world"] != "lti":
        raise ConfigError(
            "key 'method': closed-form method '{}' needs world 'lti', got '{}'".format(method, values["world"])
        )


def gen_data(config: ExperimentConfig) -> list:
    """Generate and write one expert dataset per seed."""
    values = config.values
    _check_method(values)
    data_cfg = values["data"]
    paths = []
    for seed in config.seeds:
        data_rng = _streams(seed)[0]
        if values["world"] == "lti":
            sys = reference_system()
            expert = lqr_gain(
                sys, values["expert"]["Qc"] * np.eye(sys.n), values["expert"]["Rc"] * np.eye(sys.m)
            )
            data = generate_expert_dataset(
                sys,
                expert,
                data_cfg["n_traj"],
                data_cfg["T"],
                NoiseModel.gaussian(data_cfg["x0_var"], dim=sys.n),
                NoiseModel.gaussian(data_cfg["xi_var"], dim=sys.n),
                NoiseModel.gaussian(data_cfg["eta_var"], dim=sys.m),
                data_rng,
            )
        else:
            params = PendulumParams(**values["pendulum"])
            data = generate_nonlinear_dataset(
                pendulum_dynamics(params),
                PendulumExpert(params),
                data_cfg["n_traj"],
                data_cfg["T"],
                pendulum_x0_model(),
                NoiseModel.gaussian(data_cfg["xi_var"], dim=2),
                NoiseModel.gaussian(data_cfg["eta_var"], dim=1),
                ObsEncoder("trig_angle"),
                data_rng,
            )
        data.meta["config_hash"] = config.config_hash
        path = seed_dir(config, seed) / DATASET_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        paths.append(write_dataset(data, path))
    return paths


def train_stage(config: ExperimentConfig) -> list:
    """Fit the configured method on every seed's dataset and write the model."""
    values = config.values
    _check_method(values)
    method, H, train_cfg = values["method"], values["H"], values["train"]
    paths = []
    for seed in config.seeds:
        folder = seed_dir(config, seed)
        data = read_dataset(folder / DATASET_FILE)
        dyn, sys = _dynamics_from_meta(data.meta)
        meta = {"method": method, "seed": seed, "config_hash": config.config_hash}

        if method.startswith(NETWORK_PREFIX):
            init_rng, batch_rng = _streams(seed)[1].spawn(2)
            encoder = ObsEncoder(data.meta.get("encoder", "raw"))
            model, log = train_network(
                data, dyn, encoder, method[len(NETWORK_PREFIX):], H, train_cfg, init_rng, batch_rng
            )
            log.write_csv(folder / TRAINING_LOG_FILE)
            paths.append(model.save(folder / CHECKPOINT_FILE, meta))
            continue

        if sys is None:
            raise ConfigError("key 'method': '{}' needs a linear dataset".format(method))
        n, m = sys.n, sys.m
        w = LossWeightsLinear(
            train_cfg["Q"] * np.eye(n),
            train_cfg["R"] * np.eye(m),
            train_cfg["P"] * np.eye(n),
            H=H,
            alpha=train_cfg["alpha"],
        )
        predictors = None
        if method == "bc":
            gain = fit_bc(data)
        elif method == "pil_h1":
            gain = fit_pil_h1(data, sys, w.Q, w.R)
        elif method == "pil_fixed_G":
            predictors = fit_predictors_ols(data, H, ridge=values["ridge"])
            gain = fit_pil_fixed_G(data, sys, predictors, w)
        else:
            gain, predictors, info = fit_pil_alternating(data, sys, w, max_iters=values["max_iters"])
            meta.update({"iterations": info["iterations"], "converged": info["converged"]})
        paths.append(write_linear_model(folder / LINEAR_MODEL_FILE, gain, predictors, meta))
    return paths


def eval_stage(config: ExperimentConfig) -> Path:
    """Evaluate every seed's model against the expert recorded in its dataset metadata."""
    values = config.values
    method, eval_cfg = values["method"], values["eval"]
    rows = []
    for seed in config.seeds:
        folder = seed_dir(config, seed)
        meta = read_metadata(folder / DATASET_FILE)
        dyn, _ = _dynamics_from_meta(meta)
        expert = _expert_from_meta(meta, dyn)
        encoder = ObsEncoder(meta.get("encoder", "raw"))
        if method.startswith(NETWORK_PREFIX):
            model, _ = PilModel.load(folder / CHECKPOINT_FILE)
            policy = deploy_policy(model, encoder)
        else:
            gain, _, _ = read_linear_model(folder / LINEAR_MODEL_FILE)
            if gain is None:
                raise DatasetFormatError("no gain stored in {}".format(folder / LINEAR_MODEL_FILE))
            policy = gain

        noise = meta["noise"]
        x0_model = NoiseModel.fromDict(noise["x0"])
        xi_model = NoiseModel.fromDict(noise["xi"])
        test_rng = _streams(seed)[2]
        args = (eval_cfg["n_test"], eval_cfg["T"])
        gap = max_discrepancy(dyn, expert, policy, *args, x0_model, xi_model, test_rng.clone(), encoder)
        H = values["H"]
        rows += [
            result_row(EXPERIMENT, method, H, seed, "discrepancy_mean", gap.mean, config.config_hash),
            result_row(EXPERIMENT, method, H, seed, "discrepancy_half_std", gap.half_std, config.config_hash),
        ]
        if dyn.name == "pendulum":
            ret = episode_return(dyn, policy, *args, test_rng.clone(), expert, x0_model, xi_model, encoder)
            rows += [
                result_row(EXPERIMENT, method, H, seed, "return_mean", ret.mean, config.config_hash),
                result_row(EXPERIMENT, method, H, seed, "return_ratio", ret.ratio, config.config_hash),
            ]
        logger.info("Seed {} {}: discrepancy {:.5f}".format(seed, method, gap.mean))
    return write_results(config.output_dir / RESULTS_FILE, rows)


def run_pipeline(config: ExperimentConfig) -> dict:
    """All three stages in a row."""
    return {
        "datasets": gen_data(config),
        "models": train_stage(config),
        "results": eval_stage(config),
    }
