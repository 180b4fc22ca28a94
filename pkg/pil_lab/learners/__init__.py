# coding: utf-8
#! python3  # noqa: E265

from .linear_learners import (  # noqa: F401
    ComparisonReport,
    LossWeightsLinear,
    PredictorSetLinear,
    compare_pil_bc,
    fit_bc,
    fit_pil_alternating,
    fit_pil_fixed_G,
    fit_pil_h1,
    fit_predictors_ols,
    pil_linear_loss,
    read_linear_model,
    write_linear_model,
)
from .pil_nn import (  # noqa: F401
    Chunks,
    DeployedPolicy,
    LossBreakdown,
    PilLossConfig,
    PilModel,
    TrainingLog,
    bc_chunk_loss,
    deploy_policy,
    evaluate_loss,
    extract_chunks,
    pil_chunk_loss,
    rollout_chunk_loss,
    train,
)
