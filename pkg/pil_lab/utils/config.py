# -*- coding: utf-8 -*-
#! python3

"""
    Experiment configuration: YAML files validated against a per-experiment
    schema of defaults.

    Rules:

    - every key must exist in the schema (unknown keys raise, naming the dotted key);
    - missing keys take the schema default;
    - values are coerced to the type of the default.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import copy
import hashlib
import json
import logging
from pathlib import Path

# 3rd party library
import yaml

# submodules
from pil_lab.utils.errors import ConfigError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

# keys left out of the config hash: where results go does not change them
UNHASHED_KEYS = ("output_dir",)

_TRAIN_DEFAULTS = {
    "epochs": 100,
    "batch_size": 64,
    "lr_start": 5e-4,
    "lr_end": 1e-8,
    "Q": 0.1,
    "R": 1.0,
    "P": 1.0,
    "alpha": 0.9,
    "encoder_hidden": [128, 128],
    "latent_dim": 64,
    "predictor_hidden": [128],
    "policy_hidden": [64, 64],
}

SCHEMAS = {
    "lin-noise-sweep": {
        "experiment": "lin-noise-sweep",
        "output_dir": "results/lin_noise_sweep",
        "seeds": list(range(20)),
        "expert": {"Qc": 1.0, "Rc": 0.01},
        "data": {"n_traj": 50, "T": 100, "x0_var": 1.0},
        "cases": {
            "state_noise": {"xi_var": 0.04, "eta_var": 0.0001},
            "input_noise": {"xi_var": 0.0001, "eta_var": 0.04},
        },
        "horizons": [1, 2, 4, 8, 16],
        "pil": {"Q": 1.0, "R": 1.0, "P": 1.0, "alpha": 0.9, "ridge": 0.0},
        "eval": {"n_test": 1000, "T": 100},
    },
    "lin-pred-order": {
        "experiment": "lin-pred-order",
        "output_dir": "results/lin_pred_order",
        "seeds": list(range(5)),
        "data": {"n_traj": 50, "T": 100, "x0_var": 1.0, "noise_bound": 0.01},
        "expert": {"hidden": [16, 16]},
        "horizons": [2, 4, 8],
        "methods": ["bc", "rollout", "pil"],
        "train": dict(_TRAIN_DEFAULTS, lr_end=5e-4),
        "eval": {"n_test": 100, "T": 100},
    },
    "pendulum": {
        "experiment": "pendulum",
        "output_dir": "results/pendulum",
        "seeds": list(range(5)),
        "pendulum": {"g": 9.81, "l": 1.0, "mass": 1.0, "dt": 0.05, "torque_limit": 2.0},
        "data": {"n_traj": 50, "T": 100},
        "noise": {"angle_deg": 1.0, "rate_deg": 0.001, "input": 0.1},
        "cases": ["clean", "noisy"],
        "methods": ["bc", "rollout", "rollout_nograd", "pil", "pil_nograd"],
        "H": 5,
        "train": dict(_TRAIN_DEFAULTS, epochs=200, Q=0.25, R=0.01),
        "eval": {"n_test": 1000, "T": 100},
    },
    "theory-scan": {
        "experiment": "theory-scan",
        "output_dir": "results/theory_scan",
        "seeds": list(range(30)),
        "expert": {"Qc": 1.0, "Rc": 0.01},
        "scan": {
            "estimator": "fit_pil_fixed_G",
            "H": 1,
            "T_grid": [32, 64, 128, 256, 512, 1024, 2048, 4096],
            "sigma_xi_levels": [0.0, 0.0025, 0.01, 0.04],
            "sigma_eta": 0.01,
            "segment": 8,
            "Q": 1.0,
            "R": 1.0,
            "P": 1.0,
        },
        "omega": {
            "n_datasets": 1000,
            "n_traj": 10,
            "T": 100,
            "sigma_eta": 0.01,
            "std_ratios": [0.01, 1.0, 10.0],
            "Q": 1.0,
            "R": 1.0,
        },
    },
    "pipeline": {
        "experiment": "pipeline",
        "output_dir": "results/pipeline",
        "seeds": [0],
        "world": "lti",
        "expert": {"Qc": 1.0, "Rc": 0.01},
        "pendulum": {"g": 9.81, "l": 1.0, "mass": 1.0, "dt": 0.05, "torque_limit": 2.0},
        "data": {"n_traj": 50, "T": 100, "x0_var": 1.0, "xi_var": 0.01, "eta_var": 0.01},
        "method": "pil_fixed_G",
        "H": 4,
        "ridge": 0.0,
        "max_iters": 100,
        "train": dict(_TRAIN_DEFAULTS),
        "eval": {"n_test": 1000, "T": 100},
    },
}

# dotted overrides applied by --full-scale
FULL_SCALE = {
    "lin-noise-sweep": {"seeds": list(range(100))},
    "lin-pred-order": {"seeds": list(range(10)), "train.epochs": 300},
    "pendulum": {"train.epochs": 5000},
    "theory-scan": {},
    "pipeline": {},
}

_NN_METHODS = ("bc", "rollout", "rollout_nograd", "pil", "pil_nograd")

# allowed values per experiment, by dotted key
CHOICES = {
    "lin-noise-sweep": {},
    "lin-pred-order": {"methods": ("bc", "rollout", "pil")},
    "pendulum": {"methods": _NN_METHODS, "cases": ("clean", "noisy")},
    "theory-scan": {"scan.estimator": ("fit_pil_fixed_G", "fit_bc", "fit_pil_h1")},
    "pipeline": {
        "world": ("lti", "pendulum"),
        "method": (
            "bc",
            "pil_fixed_G",
            "pil_h1",
            "pil_alternating",
            "nn_bc",
            "nn_rollout",
            "nn_pil",
        ),
    },
}

# #############################################################################
# ########## Classes ###############
# ##################################


class ExperimentConfig(object):
    """Validated experiment configuration.

    :param dict values: nested values, validated against the experiment schema
    :param pathlib.Path source: file the values were read from, if any
    """

    def __init__(self, values: dict, source: Path = None):
        if not isinstance(values, dict):
            raise ConfigError("configuration root must be a mapping, not {}".format(type(values).__name__))
        experiment = values.get("experiment")
        if experiment not in SCHEMAS:
            raise ConfigError(
                "key 'experiment' must be one of {}, got {!r}".format(sorted(SCHEMAS), experiment)
            )
        self.values = _validate(values, SCHEMAS[experiment], "")
        self.source = source
        _check_invariants(self.values)

    def __repr__(self):
        return "ExperimentConfig({}, hash={})".format(self.experiment, self.config_hash[:12])

    def __eq__(self, other):
        return isinstance(other, ExperimentConfig) and self.values == other.values

    def __getitem__(self, key: str):
        return self.get(key)

    @property
    def experiment(self) -> str:
        return self.values["experiment"]

    @property
    def seeds(self) -> list:
        return list(self.values["seeds"])

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output_dir"])

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form, output directory excluded."""
        hashed = {k: v for k, v in self.values.items() if k not in UNHASHED_KEYS}
        canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def get(self, dotted: str):
        """Value at a dotted key, e.g. ``train.epochs``."""
        node = self.values
        for part in dotted.split("."):
            if not isinstance(node, dict) or part not in node:
                raise ConfigError("unknown configuration key '{}'".format(dotted))
            node = node[part]
        return copy.deepcopy(node)

    @classmethod
    def defaults(cls, experiment: str) -> "ExperimentConfig":
        if experiment not in SCHEMAS:
            raise ConfigError("unknown experiment '{}'".format(experiment))
        return cls(copy.deepcopy(SCHEMAS[experiment]))

    @classmethod
    def from_yaml(cls, path: Path) -> "ExperimentConfig":
        """Read and validate a YAML config file."""
        path = Path(path)
        if not path.is_file():
            raise ConfigError("configuration file not found: {}".format(path))
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as err:
            raise ConfigError("invalid YAML in {}: {}".format(path, err))
        logger.debug("Configuration read from {}".format(path))
        return cls(data or {}, source=path)

    @classmethod
    def from_string(cls, text: str) -> "ExperimentConfig":
        try:
            return cls(yaml.safe_load(text) or {})
        except yaml.YAMLError as err:
            raise ConfigError("invalid YAML: {}".format(err))

    def to_yaml(self) -> str:
        """Canonical YAML text (sorted keys, block style)."""
        return yaml.safe_dump(self.values, sort_keys=True, default_flow_style=False)

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_yaml(), encoding="utf-8")
        return path

    def override(self, seeds: int = None, out: Path = None, full_scale: bool = False) -> "ExperimentConfig":
        """Apply command-line overrides and validate again.

        :param int seeds: replace the seed list by ``range(seeds)``
        :param pathlib.Path out: output directory
        :param bool full_scale: restore the full-size run (more seeds and epochs)
        """
        values = copy.deepcopy(self.values)
        if full_scale:
            for dotted, value in FULL_SCALE[self.experiment].items():
                _set_dotted(values, dotted, copy.deepcopy(value))
        if seeds is not None:
            if seeds < 1:
                raise ConfigError("key 'seeds' needs at least one seed, got {}".format(seeds))
            values["seeds"] = list(range(seeds))
        if out is not None:
            values["output_dir"] = str(out)
        return ExperimentConfig(values, source=self.source)


# #############################################################################
# ########## Functions #############
# ##################################


def _validate(values: dict, schema: dict, prefix: str) -> dict:
    out = {}
    for key in values:
        if key not in schema:
            raise ConfigError("unknown configuration key '{}{}'".format(prefix, key))
    for key, default in schema.items():
        dotted = prefix + key
        if key not in values:
            out[key] = copy.deepcopy(default)
            continue
        out[key] = _coerce(values[key], default, dotted)
    return out


def _coerce(value, default, dotted: str):
    """Coerce ``value`` to the type of ``default``."""
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError("key '{}' must be a mapping, got {!r}".format(dotted, value))
        return _validate(value, default, dotted + ".")
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError("key '{}' must be a list, got {!r}".format(dotted, value))
        if not default:
            return list(value)
        return [_coerce(item, default[0], "{}[{}]".format(dotted, i)) for i, item in enumerate(value)]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("key '{}' must be a boolean, got {!r}".format(dotted, value))
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("key '{}' must be an integer, got {!r}".format(dotted, value))
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("key '{}' must be a number, got {!r}".format(dotted, value))
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("key '{}' must be a string, got {!r}".format(dotted, value))
        return value
    return value


def _set_dotted(values: dict, dotted: str, value):
    parts = dotted.split(".")
    node = values
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _check_invariants(values: dict):
    seeds = values["seeds"]
    if not seeds:
        raise ConfigError("key 'seeds' must hold at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("key 'seeds' holds duplicates: {}".format(seeds))
    if any(s < 0 for s in seeds):
        raise ConfigError("key 'seeds' must hold nonnegative integers: {}".format(seeds))
    for dotted, choices in CHOICES[values["experiment"]].items():
        node = values
        for part in dotted.split("."):
            node = node.get(part) if isinstance(node, dict) else None
        if node is None:
            continue
        for item in node if isinstance(node, list) else [node]:
            if item not in choices:
                raise ConfigError(
                    "key '{}' accepts {}, got {!r}".format(dotted, choices, item)
                )
    horizons = values.get("horizons", [])
    if any(h < 1 for h in horizons):
        raise ConfigError("key 'horizons' must hold positive integers: {}".format(horizons))
    if "H" in values and values["H"] < 1:
        raise ConfigError("key 'H' must be a positive integer, got {}".format(values["H"]))
