# -*- coding: utf-8 -*-
#! python3

"""
    Command-line surface: ``pil-lab <command> --config <path> [--seeds N] [--out DIR]``.

    Exit codes: 0 success, 2 configuration error, 3 numerical failure,
    4 unreadable or missing artifact, 1 any other package error.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

# 3rd party library
import click
from dotenv import load_dotenv

# submodules
from pil_lab.__about__ import __title__, __version__
from pil_lab.experiments import (
    eval_stage,
    gen_data,
    run_lin_noise_sweep,
    run_lin_pred_order,
    run_pendulum,
    run_pipeline,
    run_theory_scan,
    train_stage,
)
from pil_lab.utils.config import ExperimentConfig
from pil_lab.utils.errors import ConfigError, DatasetFormatError, NumericalError, PilLabError

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

LOG_FILENAME = "pil_lab.log"
LOG_FORMAT = "%(asctime)s || %(levelname)s || %(module)s || %(funcName)s || %(lineno)s || %(message)s"

EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

# handlers installed by the last command, removed before installing new ones
_handlers = []

# #############################################################################
# ########## Functions #############
# ##################################


def configure_logging(output_dir: Path, verbose: bool = False) -> Path:
    """Console handler plus a rotating DEBUG log file in the output directory.

    :param pathlib.Path output_dir: folder receiving ``pil_lab.log``
    :param bool verbose: console at DEBUG instead of INFO
    """
    root = logging.getLogger()
    for handler in _handlers:
        root.removeHandler(handler)
        handler.close()
    _handlers.clear()

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logging.captureWarnings(True)
    root.setLevel(logging.DEBUG)
    log_form = logging.Formatter(LOG_FORMAT)

    console = logging.StreamHandler()
    console.setLevel(logging.DEBUG if verbose else logging.INFO)
    console.setFormatter(log_form)
    logfile = RotatingFileHandler(str(output_dir / LOG_FILENAME), "a", 5000000, 1)
    logfile.setLevel(logging.DEBUG)
    logfile.setFormatter(log_form)
    for handler in (console, logfile):
        root.addHandler(handler)
        _handlers.append(handler)

    logger.info("============ {} {} ================".format(__title__, __version__))
    logger.info("Python version: {}".format(sys.version_info))
    return output_dir / LOG_FILENAME


def load_config(experiment: str, config: str, seeds: int, out: str, full_scale: bool) -> ExperimentConfig:
    """Read (or default) the configuration of a command and apply the overrides.

    :raises ConfigError: when the file describes another experiment
    """
    if config:
        cfg = ExperimentConfig.from_yaml(Path(config))
    else:
        cfg = ExperimentConfig.defaults(experiment)
    if cfg.experiment != experiment:
        raise ConfigError(
            "key 'experiment' is '{}' but this command runs '{}'".format(cfg.experiment, experiment)
        )
    return cfg.override(seeds=seeds, out=Path(out) if out else None, full_scale=full_scale)


def _experiment_options(func):
    """Options shared by every command."""
    options = [
        click.option(
            "--config",
            "config",
            default=None,
            type=click.Path(dir_okay=False),
            help="Path to the YAML experiment configuration. Default: built-in defaults.",
        ),
        click.option("--seeds", default=None, type=int, help="Run seeds 0..N-1 instead of the configured list."),
        click.option("--out", default=None, help="Output folder. Default: the configured output_dir."),
        click.option(
            "--full-scale",
            is_flag=True,
            default=False,
            help="Restore the full seed counts and epochs.",
        ),
        click.option("--verbose", is_flag=True, default=False, help="Log DEBUG messages to the console."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _run(experiment: str, runner, config, seeds, out, full_scale, verbose):
    cfg = load_config(experiment, config, seeds, out, full_scale)
    configure_logging(cfg.output_dir, verbose)
    logger.info("Running {} with {} seeds, config hash {}".format(experiment, len(cfg.seeds), cfg.config_hash))
    cfg.write(cfg.output_dir / "config.yaml")
    outputs = runner(cfg)
    if isinstance(outputs, dict):
        for name, path in outputs.items():
            click.echo("{}: {}".format(name, path))
    elif isinstance(outputs, list):
        for path in outputs:
            click.echo(str(path))
    else:
        click.echo(str(outputs))
    return outputs


# #############################################################################
# ####### Command-line ############
# #################################
@click.group()
@click.version_option(__version__, prog_name="pil-lab")
def cli():
    """Model-based imitation learning experiments."""
    load_dotenv()


@cli.command("lin-noise-sweep")
@_experiment_options
def cli_lin_noise_sweep(config, seeds, out, full_scale, verbose):
    """Closed-form BC vs PIL on the linear system, high state vs high input noise."""
    _run("lin-noise-sweep", run_lin_noise_sweep, config, seeds, out, full_scale, verbose)


@cli.command("lin-pred-order")
@_experiment_options
def cli_lin_pred_order(config, seeds, out, full_scale, verbose):
    """Network BC, rollout and PIL against a random MLP expert, per horizon."""
    _run("lin-pred-order", run_lin_pred_order, config, seeds, out, full_scale, verbose)


@cli.command("pendulum")
@_experiment_options
def cli_pendulum(config, seeds, out, full_scale, verbose):
    """Pendulum swing-up table: five variants, with and without noise."""
    _run("pendulum", run_pendulum, config, seeds, out, full_scale, verbose)


@cli.command("theory-scan")
@_experiment_options
def cli_theory_scan(config, seeds, out, full_scale, verbose):
    """Error scaling scan and noise-term Monte Carlo of the linear estimators."""
    _run("theory-scan", run_theory_scan, config, seeds, out, full_scale, verbose)


@cli.command("gen-data")
@_experiment_options
def cli_gen_data(config, seeds, out, full_scale, verbose):
    """Pipeline stage 1: write one expert dataset per seed."""
    _run("pipeline", gen_data, config, seeds, out, full_scale, verbose)


@cli.command("train")
@_experiment_options
def cli_train(config, seeds, out, full_scale, verbose):
    """Pipeline stage 2: fit the configured method on each dataset."""
    _run("pipeline", train_stage, config, seeds, out, full_scale, verbose)


@cli.command("eval")
@_experiment_options
def cli_eval(config, seeds, out, full_scale, verbose):
    """Pipeline stage 3: evaluate the trained models against their expert."""
    _run("pipeline", eval_stage, config, seeds, out, full_scale, verbose)


@cli.command("pipeline")
@_experiment_options
def cli_pipeline(config, seeds, out, full_scale, verbose):
    """gen-data, train and eval in one go."""
    _run("pipeline", run_pipeline, config, seeds, out, full_scale, verbose)


def main(args: list = None) -> int:
    """Entry point: run the command and map package errors to exit codes."""
    try:
        cli.main(args=args, prog_name="pil-lab", standalone_mode=False)
    except click.ClickException as err:
        err.show()
        return err.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_OTHER
    except ConfigError as err:
        logger.error("Configuration error: {}".format(err))
        click.echo("Configuration error: {}".format(err), err=True)
        return EXIT_CONFIG
    except NumericalError as err:
        logger.error("Numerical failure: {}".format(err))
        click.echo("Numerical failure: {}".format(err), err=True)
        return EXIT_NUMERICAL
    except (DatasetFormatError, OSError) as err:
        logger.error("I/O error: {}".format(err))
        click.echo("I/O error: {}".format(err), err=True)
        return EXIT_IO
    except PilLabError as err:
        logger.error("{}: {}".format(type(err).__name__, err))
        click.echo("Error: {}".format(err), err=True)
        return EXIT_OTHER
    return 0


# #############################################################################
# ### Stand alone execution #######
# #################################

if __name__ == "__main__":
    sys.exit(main())
