# coding: utf-8
#! python3  # noqa: E265

from .lin_noise_sweep import run_lin_noise_sweep  # noqa: F401
from .lin_pred_order import run_lin_pred_order  # noqa: F401
from .pendulum_table import run_pendulum  # noqa: F401
from .pipeline import eval_stage, gen_data, run_pipeline, train_stage  # noqa: F401
from .runner import run_seeds, threads_from_env, train_network  # noqa: F401
from .theory_scan import run_theory_scan  # noqa: F401
