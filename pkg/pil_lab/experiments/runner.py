# -*- coding: utf-8 -*-
#! python3

"""
    Seed-level fan-out and results rows shared by the experiments.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from os import environ
from pathlib import Path

# 3rd party library
import numpy as np

# submodules
from pil_lab.learners.pil_nn import PilLossConfig, PilModel, train
from pil_lab.reporters.csv_reporter import RESULTS_HEADERS, CsvReporter
from pil_lab.utils.errors import ConfigError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

THREADS_ENV = "PIL_LAB_THREADS"

# #############################################################################
# ########## Functions #############
# ##################################


def threads_from_env() -> int:
    """Worker process count read from ``PIL_LAB_THREADS``, 1 when unset."""
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError("{} must be a positive integer, got '{}'".format(THREADS_ENV, raw))
    if threads < 1:
        raise ConfigError("{} must be a positive integer, got {}".format(THREADS_ENV, threads))
    return threads


def run_seeds(func, seeds: list, *args, threads: int = None) -> list:
    """Run ``func(seed, *args)`` for every seed, results in seed-list order.

    Work is spread over ``threads`` worker processes; ``func`` and its
    arguments must then be picklable (module-level function, plain values).
    Each seed owns its random streams, so the results do not depend on the
    worker count.

    :param func: per-seed job
    :param list seeds: seeds to run
    :param int threads: worker count, ``PIL_LAB_THREADS`` by default
    """
    threads = threads_from_env() if threads is None else int(threads)
    if threads <= 1 or len(seeds) <= 1:
        results = []
        for i, seed in enumerate(seeds):
            logger.info("Seed {} ({}/{})".format(seed, i + 1, len(seeds)))
            results.append(func(seed, *args))
        return results

    logger.info("Running {} seeds on {} worker processes".format(len(seeds), threads))
    with ProcessPoolExecutor(max_workers=min(threads, len(seeds))) as pool:
        futures = [pool.submit(func, seed, *args) for seed in seeds]
        results = []
        for seed, future in zip(seeds, futures):
            results.append(future.result())
            logger.info("Seed {} done".format(seed))
    return results


def result_row(experiment: str, method: str, H, seed, metric: str, value, config_hash: str) -> dict:
    return {
        "experiment": experiment,
        "method": method,
        "H": H,
        "seed": seed,
        "metric": metric,
        "value": value,
        "config_hash": config_hash,
    }


def write_results(csvpath: Path, rows: list) -> Path:
    """Results CSV with the shared header."""
    reporter = CsvReporter(csvpath=Path(csvpath), headers=RESULTS_HEADERS)
    reporter.add_multiple(rows)
    logger.info("Results written: {} ({} rows)".format(csvpath, len(rows)))
    return Path(csvpath)


def mean_half_std(values: list) -> tuple:
    """Mean and half standard deviation (ddof 0) across seeds, NaN when empty."""
    values = np.asarray(values, dtype=np.float64)
    if not values.size:
        return math.nan, math.nan
    return float(values.mean()), 0.5 * float(values.std())


def collect(rows: list, metric: str, method: str, H="") -> list:
    """Values of ``metric`` for one method and horizon, across seeds."""
    return [r["value"] for r in rows if r["metric"] == metric and r["method"] == method and r["H"] == H]


def train_network(
    data, dyn, encoder, mode: str, H: int, train_cfg: dict, init_rng, batch_rng, dynamics_gradient: bool = True
) -> tuple:
    """Create and train one network model, shared by the experiments and the pipeline.

    :param str mode: ``bc``, ``rollout`` or ``pil``
    :param dict train_cfg: ``train`` section of a config
    :param RngStream init_rng: weight initialization stream
    :param RngStream batch_rng: minibatch sampling stream

    :return: (PilModel, TrainingLog)
    """
    n, m = dyn.state_dim, dyn.input_dim
    p = encoder.obs_dim(n)
    model = PilModel.create(
        p,
        n,
        m,
        H,
        init_rng,
        with_predictors=mode == "pil",
        encoder_hidden=tuple(train_cfg["encoder_hidden"]),
        latent_dim=train_cfg["latent_dim"],
        predictor_hidden=tuple(train_cfg["predictor_hidden"]),
        policy_hidden=tuple(train_cfg["policy_hidden"]),
    )
    cfg = PilLossConfig(
        train_cfg["Q"] * np.eye(p),
        train_cfg["R"] * np.eye(m),
        train_cfg["P"] * np.eye(n),
        H=H,
        alpha=train_cfg["alpha"],
        mode=mode,
        dynamics_gradient=dynamics_gradient,
    )
    log = train(
        model,
        data,
        dyn,
        cfg,
        train_cfg["epochs"],
        batch_rng,
        encoder=encoder,
        batch_size=train_cfg["batch_size"],
        lr_start=train_cfg["lr_start"],
        lr_end=train_cfg["lr_end"],
    )
    return model, log
