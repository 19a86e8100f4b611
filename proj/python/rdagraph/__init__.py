"""Python bindings for the rdagraph solvers."""

from ._core import (
    ConfigError,
    H,
    NumericalError,
    Profile,
    alpha,
    area_A,
    beta,
    covariance_matrix_2d,
    fit_slope,
    generator_2d,
    generator_graph,
    graph_kernel_bar,
    increments,
    invert_F,
    kernel,
    kron,
    level_coefficients,
    matrix_exp,
    period_T,
    psd_sqrt,
    run,
    spearman,
    validate_profile,
    wedge,
)

__all__ = [name for name in dir() if not name.startswith("_")]
