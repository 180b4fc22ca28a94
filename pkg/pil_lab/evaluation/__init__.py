# coding: utf-8
#! python3  # noqa: E265

from .eval_metrics import (  # noqa: F401
    DiscrepancyResult,
    EpisodeReturn,
    OmegaStats,
    ScalingFit,
    discrepancy_ratio,
    episode_return,
    max_discrepancy,
    omega_monte_carlo,
    pendulum_reward,
    scaling_scan,
    write_plot_data,
)
