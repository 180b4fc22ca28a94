# coding: utf-8
#! python3  # noqa: E265

from .linalg import (  # noqa: F401
    as_mat,
    check_psd,
    reciprocal_condition,
    solve_linear,
    solve_right,
    spectral_norm,
    spectral_radius,
)
from .noise import NoiseModel, RngStream, as_noise_model, sample_noise  # noqa: F401
