"""Structured input-output lasso."""

from ._siol import (
    InputError,
    PenaltyConfig,
    SolverError,
    aupr,
    cv,
    dag_dot,
    fit,
    interaction_p_value,
    lambda1_max,
    objective,
    penalty_from_prime,
    simulate,
    standardize_rows,
)

__all__ = [
    "InputError",
    "PenaltyConfig",
    "SolverError",
    "aupr",
    "cv",
    "dag_dot",
    "fit",
    "interaction_p_value",
    "lambda1_max",
    "objective",
    "penalty_from_prime",
    "simulate",
    "standardize_rows",
]
