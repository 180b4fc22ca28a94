# -*- coding: UTF-8 -*-
#! python3

"""
    Usage from the repo root folder:

    ```python
    python -m unittest tests.test_config_cli
    ```
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import logging
import shutil
import unittest
from pathlib import Path

# 3rd party
import yaml

# modules
from pil_lab import cli
from pil_lab.numkit import NoiseModel, RngStream
from pil_lab.reporters import RESULTS_HEADERS, read_csv_rows
from pil_lab.utils.config import SCHEMAS, ExperimentConfig
from pil_lab.utils.errors import ConfigError
from pil_lab.worlds import (
    ObsEncoder,
    generate_nonlinear_dataset,
    mlp_expert_linear,
    reference_system,
    write_dataset,
)

# #############################################################################
# ######## Globals #################
# ##################################

OUTPUT_DIR = Path(__file__).parent / "output" / "config_cli"
CONFIGS_DIR = Path(__file__).parent.parent / "configs"

PIPELINE_SMALL = {
    "experiment": "pipeline",
    "seeds": [0, 1],
    "world": "lti",
    "data": {"n_traj": 5, "T": 20},
    "method": "pil_fixed_G",
    "H": 2,
    "eval": {"n_test": 5, "T": 20},
}

# #############################################################################
# ########## Classes ###############
# ##################################


class TestExperimentConfig(unittest.TestCase):
    """Loading, validating and hashing configurations."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def tearDown(self):
        """Executed after each test."""
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    #  -- Tests ------------------------------------------------------------
    def test_shipped_configs_are_valid(self):
        paths = sorted(CONFIGS_DIR.glob("**/*.yaml"))
        self.assertGreater(len(paths), 0)
        for path in paths:
            cfg = ExperimentConfig.from_yaml(path)
            self.assertEqual(cfg.source, path)

    def test_builtin_defaults_are_valid(self):
        for experiment in SCHEMAS:
            cfg = ExperimentConfig.defaults(experiment)
            self.assertEqual(cfg.experiment, experiment)
        sweep = ExperimentConfig.defaults("lin-noise-sweep")
        self.assertEqual(sorted(sweep["cases"]), ["input_noise", "state_noise"])

    def test_choices_depend_on_experiment(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_string("experiment: pendulum\ncases: [clean, windy]\n")
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_string("experiment: lin-pred-order\nmethods: [bc, pil_nograd]\n")
        cfg = ExperimentConfig.from_string(
            "experiment: lin-noise-sweep\ncases:\n  state_noise:\n    xi_var: 0.09\n"
        )
        self.assertEqual(cfg["cases.state_noise.xi_var"], 0.09)
        self.assertEqual(cfg["cases.input_noise.eta_var"], 0.04)

    def test_round_trip(self):
        cfg = ExperimentConfig.defaults("pendulum")
        again = ExperimentConfig.from_yaml(cfg.write(OUTPUT_DIR / "config.yaml"))
        self.assertEqual(again, cfg)
        self.assertEqual(again.config_hash, cfg.config_hash)

    def test_defaults_fill_missing_keys(self):
        cfg = ExperimentConfig.from_string("experiment: lin-pred-order\ntrain:\n  epochs: 3\n")
        self.assertEqual(cfg["train.epochs"], 3)
        self.assertEqual(cfg["train.R"], 1.0)
        self.assertEqual(cfg["horizons"], [2, 4, 8])

    def test_unknown_key_is_named(self):
        with self.assertRaises(ConfigError) as ctx:
            ExperimentConfig.from_string("experiment: pendulum\ntrain:\n  epoch: 3\n")
        self.assertIn("train.epoch", str(ctx.exception))
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_string("experiment: dagger\n")
        with self.assertRaises(ConfigError):
            ExperimentConfig.defaults("lin-pred-order").get("train.momentum")

    def test_type_coercion(self):
        cfg = ExperimentConfig.from_string("experiment: pendulum\ntrain:\n  lr_start: 1\n")
        self.assertIsInstance(cfg["train.lr_start"], float)
        for bad in ("H: 2.5", "H: true", "seeds: 3", "methods: [bc, dagger]", "H: 0", "seeds: [1, 1]"):
            with self.assertRaises(ConfigError, msg=bad):
                ExperimentConfig.from_string("experiment: pendulum\n{}\n".format(bad))
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_string("experiment: [pendulum")
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_yaml(OUTPUT_DIR / "missing.yaml")

    def test_overrides(self):
        cfg = ExperimentConfig.defaults("pendulum")
        small = cfg.override(seeds=3, out=OUTPUT_DIR / "pendulum")
        self.assertEqual(small.seeds, [0, 1, 2])
        self.assertEqual(small.output_dir, OUTPUT_DIR / "pendulum")
        self.assertEqual(cfg.override(full_scale=True)["train.epochs"], 5000)
        with self.assertRaises(ConfigError):
            cfg.override(seeds=0)

    def test_hash_excludes_output_dir(self):
        cfg = ExperimentConfig.defaults("theory-scan")
        moved = cfg.override(out=OUTPUT_DIR / "elsewhere")
        self.assertEqual(moved.config_hash, cfg.config_hash)
        self.assertNotEqual(cfg.override(seeds=2).config_hash, cfg.config_hash)
        self.assertEqual(len(cfg.config_hash), 64)


class TestCommandLine(unittest.TestCase):
    """Commands run through ``main`` and their exit codes."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def tearDown(self):
        """Executed after each test."""
        root = logging.getLogger()
        for handler in cli._handlers:
            root.removeHandler(handler)
            handler.close()
        cli._handlers.clear()
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    def _config(self, name: str, values: dict) -> str:
        path = OUTPUT_DIR / name
        path.write_text(yaml.safe_dump(values), encoding="utf-8")
        return str(path)

    #  -- Tests ------------------------------------------------------------
    def test_pipeline_stages(self):
        config = self._config("pipeline.yaml", PIPELINE_SMALL)
        out = OUTPUT_DIR / "run"
        for command in ("gen-data", "train", "eval"):
            self.assertEqual(cli.main([command, "--config", config, "--out", str(out)]), 0, command)
        for seed in (0, 1):
            self.assertTrue((out / "seed_{}".format(seed) / "dataset.csv").is_file())
            self.assertTrue((out / "seed_{}".format(seed) / "model.csv").is_file())
        self.assertTrue((out / "pil_lab.log").is_file())
        self.assertTrue((out / "config.yaml").is_file())

        headers, rows = read_csv_rows(out / "results.csv")
        self.assertEqual(headers, RESULTS_HEADERS)
        self.assertEqual({r[3] for r in rows}, {"0", "1"})
        self.assertEqual({r[4] for r in rows}, {"discrepancy_mean", "discrepancy_half_std"})
        config_hash = ExperimentConfig.from_yaml(Path(config)).config_hash
        self.assertTrue(all(r[6] == config_hash for r in rows))

    def test_reruns_are_byte_identical(self):
        config = self._config("pipeline.yaml", dict(PIPELINE_SMALL, method="pil_alternating"))
        outputs = []
        for run in ("first", "second"):
            out = OUTPUT_DIR / run
            for command in ("gen-data", "train", "eval"):
                self.assertEqual(cli.main([command, "--config", config, "--out", str(out)]), 0)
            outputs.append(out)
        self.assertEqual(
            (outputs[0] / "results.csv").read_bytes(), (outputs[1] / "results.csv").read_bytes()
        )
        self.assertEqual(
            (outputs[0] / "seed_0" / "dataset.csv").read_bytes(),
            (outputs[1] / "seed_0" / "dataset.csv").read_bytes(),
        )

    def test_regenerated_intermediates_reproduce_results(self):
        config = self._config("pipeline.yaml", PIPELINE_SMALL)
        out = OUTPUT_DIR / "whole"
        self.assertEqual(cli.main(["pipeline", "--config", config, "--out", str(out)]), 0)
        expected = (out / "results.csv").read_bytes()

        for seed in (0, 1):
            shutil.rmtree(out / "seed_{}".format(seed))
        (out / "results.csv").unlink()
        for command in ("gen-data", "train", "eval"):
            self.assertEqual(cli.main([command, "--config", config, "--out", str(out)]), 0)
        self.assertEqual((out / "results.csv").read_bytes(), expected)

    def test_eval_with_random_mlp_expert(self):
        """Stages rebuild a random MLP expert from the seed stored in the dataset."""
        config = self._config("pipeline.yaml", dict(PIPELINE_SMALL, seeds=[0], method="bc"))
        out = OUTPUT_DIR / "mlp"
        self.assertEqual(cli.main(["gen-data", "--config", config, "--out", str(out)]), 0)
        sys = reference_system()
        data = generate_nonlinear_dataset(
            sys.as_dynamics(),
            mlp_expert_linear(sys, seed=7),
            5,
            20,
            NoiseModel.gaussian(1.0, dim=2),
            NoiseModel.gaussian(1e-4, dim=2),
            NoiseModel.gaussian(1e-4, dim=1),
            ObsEncoder("raw"),
            RngStream(0),
        )
        self.assertEqual(data.meta["expert"]["seed"], 7)
        write_dataset(data, out / "seed_0" / "dataset.csv")
        for command in ("train", "eval"):
            self.assertEqual(cli.main([command, "--config", config, "--out", str(out)]), 0, command)
        _, rows = read_csv_rows(out / "results.csv")
        self.assertEqual(len(rows), 2)

    def test_config_errors_exit_2(self):
        pendulum = self._config("pendulum.yaml", {"experiment": "pendulum"})
        self.assertEqual(cli.main(["lin-noise-sweep", "--config", pendulum]), cli.EXIT_CONFIG)
        unknown = self._config("unknown.yaml", {"experiment": "pipeline", "dataset": {}})
        self.assertEqual(cli.main(["gen-data", "--config", unknown]), cli.EXIT_CONFIG)
        mismatch = self._config(
            "mismatch.yaml", dict(PIPELINE_SMALL, world="pendulum", output_dir=str(OUTPUT_DIR / "m"))
        )
        self.assertEqual(cli.main(["gen-data", "--config", mismatch]), cli.EXIT_CONFIG)

    def test_missing_artifacts_exit_4(self):
        config = self._config("pipeline.yaml", PIPELINE_SMALL)
        out = OUTPUT_DIR / "empty"
        self.assertEqual(cli.main(["eval", "--config", config, "--out", str(out)]), cli.EXIT_IO)
        self.assertEqual(cli.main(["train", "--config", config, "--out", str(out)]), cli.EXIT_IO)

    def test_degenerate_data_exit_3(self):
        values = dict(PIPELINE_SMALL, method="bc", data={"n_traj": 2, "T": 5, "x0_var": 0.0, "xi_var": 0.0, "eta_var": 0.0})
        config = self._config("degenerate.yaml", values)
        out = str(OUTPUT_DIR / "degenerate")
        self.assertEqual(cli.main(["gen-data", "--config", config, "--out", out]), 0)
        self.assertEqual(cli.main(["train", "--config", config, "--out", out]), cli.EXIT_NUMERICAL)

    def test_usage_error(self):
        self.assertEqual(cli.main(["gen-data", "--seeds", "many"]), 2)
        self.assertEqual(cli.main(["--version"]), 0)


# ##############################################################################
# ##### Stand alone program ########
# ##################################
if __name__ == "__main__":
    unittest.main()
