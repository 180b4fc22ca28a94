# coding: utf-8
#! python3  # noqa: E265

from .dataset import (  # noqa: F401
    ObservationView,
    Trajectory,
    TrajectoryDataset,
    read_dataset,
    read_metadata,
    write_dataset,
    write_metadata,
)
from .dynamics import DynamicsFn, ObsEncoder, wrap_angle  # noqa: F401
from .lti_world import (  # noqa: F401
    CoverageReport,
    FeedbackGain,
    LinearPolicy,
    LtiSystem,
    as_dynamics,
    check_coverage,
    reference_system,
    generate_expert_dataset,
    lqr_gain,
    rollout_expert_batch,
    rollout_learned,
    rollout_learned_batch,
    simulate_expert,
)
from .nonlinear_world import (  # noqa: F401
    PendulumExpert,
    PendulumParams,
    RandomMlpExpert,
    generate_nonlinear_dataset,
    mlp_expert_linear,
    pendulum_dynamics,
    pendulum_expert,
    pendulum_noise_models,
    pendulum_step,
    pendulum_x0_model,
)
