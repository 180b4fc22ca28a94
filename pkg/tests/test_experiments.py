# -*- coding: UTF-8 -*-
#! python3

"""
    Usage from the repo root folder:

    ```python
    python -m unittest tests.test_experiments
    ```
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import math
import shutil
import unittest
from os import environ
from pathlib import Path
from unittest.mock import patch

# modules
from pil_lab.experiments import (
    run_lin_noise_sweep,
    run_lin_pred_order,
    run_pendulum,
    run_seeds,
    run_theory_scan,
    threads_from_env,
)
from pil_lab.experiments.runner import collect, mean_half_std, result_row
from pil_lab.reporters import read_csv_rows
from pil_lab.utils.config import ExperimentConfig
from pil_lab.utils.errors import ConfigError

# #############################################################################
# ######## Globals #################
# ##################################

OUTPUT_DIR = Path(__file__).parent / "output" / "experiments"

TINY_NETWORKS = {
    "epochs": 2,
    "batch_size": 16,
    "encoder_hidden": [8],
    "latent_dim": 4,
    "predictor_hidden": [8],
    "policy_hidden": [8],
}

# #############################################################################
# ########## Functions #############
# ##################################


def _square(seed: int, offset: int) -> int:
    return seed * seed + offset


def _results(path: Path) -> list:
    headers, rows = read_csv_rows(path)
    return [dict(zip(headers, row)) for row in rows]


# #############################################################################
# ########## Classes ###############
# ##################################


class TestRunner(unittest.TestCase):
    """Seed runner and result helpers."""

    #  -- Tests ------------------------------------------------------------
    def test_run_seeds_order(self):
        self.assertEqual(run_seeds(_square, [3, 1, 2], 1, threads=1), [10, 2, 5])
        self.assertEqual(run_seeds(_square, [3, 1, 2], 1, threads=2), [10, 2, 5])

    def test_threads_from_env(self):
        with patch.dict(environ, {"PIL_LAB_THREADS": "3"}):
            self.assertEqual(threads_from_env(), 3)
        with patch.dict(environ, {"PIL_LAB_THREADS": ""}):
            self.assertEqual(threads_from_env(), 1)
        for bad in ("zero", "0", "-2"):
            with patch.dict(environ, {"PIL_LAB_THREADS": bad}):
                with self.assertRaises(ConfigError):
                    threads_from_env()

    def test_helpers(self):
        rows = [
            result_row("x", "pil", 2, 0, "discrepancy_mean", 1.0, "h"),
            result_row("x", "pil", 2, 1, "discrepancy_mean", 3.0, "h"),
            result_row("x", "pil", 4, 0, "discrepancy_mean", 9.0, "h"),
        ]
        self.assertEqual(collect(rows, "discrepancy_mean", "pil", 2), [1.0, 3.0])
        self.assertEqual(mean_half_std([1.0, 3.0]), (2.0, 0.5))
        self.assertTrue(all(math.isnan(v) for v in mean_half_std([])))


class TestExperiments(unittest.TestCase):
    """Tiny end-to-end runs of every experiment."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def tearDown(self):
        """Executed after each test."""
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    #  -- Tests ------------------------------------------------------------
    def test_lin_noise_sweep(self):
        cfg = ExperimentConfig(
            {
                "experiment": "lin-noise-sweep",
                "output_dir": str(OUTPUT_DIR / "sweep"),
                "seeds": [0, 1],
                "data": {"n_traj": 5, "T": 30},
                "horizons": [1, 3],
                "eval": {"n_test": 10, "T": 30},
            }
        )
        outputs = run_lin_noise_sweep(cfg)
        self.assertEqual(set(outputs), {"results", "plot_state_noise", "plot_input_noise"})
        rows = _results(outputs["results"])
        # per seed and case: BC (2 metrics) and 3 metrics per horizon
        self.assertEqual(len(rows), 2 * 2 * (2 + 3 * 2))
        bc = [r for r in rows if r["method"] == "bc/state_noise"]
        self.assertTrue(all(r["H"] == "" for r in bc))
        self.assertTrue(all(r["config_hash"] == cfg.config_hash for r in rows))
        headers, plot = read_csv_rows(outputs["plot_state_noise"])
        self.assertEqual(headers, ["H", "pil_over_bc_mean", "pil_over_bc_half_std", "config_hash"])
        self.assertEqual([row[0] for row in plot], ["1", "3"])

    def test_workers_do_not_change_results(self):
        values = {
            "experiment": "lin-noise-sweep",
            "seeds": [0, 1],
            "data": {"n_traj": 4, "T": 20},
            "horizons": [2],
            "eval": {"n_test": 5, "T": 20},
        }
        contents = []
        for threads in ("1", "2"):
            cfg = ExperimentConfig(dict(values, output_dir=str(OUTPUT_DIR / threads)))
            with patch.dict(environ, {"PIL_LAB_THREADS": threads}):
                contents.append(run_lin_noise_sweep(cfg)["results"].read_bytes())
        self.assertEqual(contents[0], contents[1])

    def test_lin_pred_order(self):
        cfg = ExperimentConfig(
            {
                "experiment": "lin-pred-order",
                "output_dir": str(OUTPUT_DIR / "pred_order"),
                "seeds": [0],
                "data": {"n_traj": 3, "T": 12},
                "horizons": [2, 3],
                "train": TINY_NETWORKS,
                "eval": {"n_test": 3, "T": 12},
            }
        )
        outputs = run_lin_pred_order(cfg)
        rows = _results(outputs["results"])
        methods = {(r["method"], r["H"]) for r in rows}
        self.assertEqual(
            methods, {("bc", "1"), ("rollout", "2"), ("rollout", "3"), ("pil", "2"), ("pil", "3")}
        )
        headers, plot = read_csv_rows(outputs["plot"])
        self.assertEqual(headers[0], "H")
        self.assertIn("pil_mean", headers)
        self.assertEqual(len(plot), 2)

    def test_pendulum(self):
        cfg = ExperimentConfig(
            {
                "experiment": "pendulum",
                "output_dir": str(OUTPUT_DIR / "pendulum"),
                "seeds": [0],
                "data": {"n_traj": 2, "T": 10},
                "methods": ["bc", "pil_nograd"],
                "H": 2,
                "train": TINY_NETWORKS,
                "eval": {"n_test": 2, "T": 10},
            }
        )
        outputs = run_pendulum(cfg)
        rows = _results(outputs["results"])
        names = {r["method"] for r in rows}
        self.assertEqual(names, {"bc/clean", "bc/noisy", "pil_nograd/clean", "pil_nograd/noisy"})
        self.assertEqual(
            {r["metric"] for r in rows},
            {"discrepancy_mean", "discrepancy_half_std", "return_mean", "return_ratio"},
        )
        headers, table = read_csv_rows(outputs["table"])
        self.assertEqual(headers, ["method", "clean_mean", "clean_half_std", "noisy_mean", "noisy_half_std", "config_hash"])
        self.assertEqual([row[0] for row in table], ["bc", "pil_nograd"])

    def test_theory_scan(self):
        cfg = ExperimentConfig(
            {
                "experiment": "theory-scan",
                "output_dir": str(OUTPUT_DIR / "theory"),
                "seeds": [0, 1],
                "scan": {"T_grid": [32, 128], "sigma_xi_levels": [0.0, 0.01, 0.04]},
                "omega": {"n_datasets": 2, "n_traj": 2, "T": 20},
            }
        )
        outputs = run_theory_scan(cfg)
        self.assertEqual(set(outputs), {"scaling", "omega", "results"})
        rows = _results(outputs["results"])
        metrics = {r["metric"] for r in rows}
        self.assertTrue({"slope", "intercept", "kappa1", "kappa2@0.01", "plateau_ratio@0.01->0.04"} <= metrics)
        omega_methods = {r["method"] for r in rows if r["method"].startswith("omega@")}
        self.assertEqual(omega_methods, {"omega@0.01", "omega@1.0", "omega@10.0"})
        headers, omega = read_csv_rows(outputs["omega"])
        self.assertEqual(headers[0], "std_ratio")
        self.assertEqual(len(omega), 3)
        headers, scaling = read_csv_rows(outputs["scaling"])
        self.assertEqual(headers[0], "T_eff")
        self.assertEqual([row[0] for row in scaling], ["32", "128"])


# ##############################################################################
# ##### Stand alone program ########
# ##################################
if __name__ == "__main__":
    unittest.main()
