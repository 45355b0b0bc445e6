"""Likelihoods, divergence-rate comparison, order selection and estimators."""

from src.modelsel.estimators import (
    bmc0_kernel,
    bmc_degrees_of_freedom,
    bmc_kernel,
    empirical_kernel,
    equal_mass_assignment,
    estimation_risk,
    fit_order_base_models,
    kernel_estimators,
    uniform_kernel,
)
from src.modelsel.experiments import order_error_experiment, risk_curve_experiment
from src.modelsel.likelihood import (
    Decision,
    KlReport,
    bmc_loglik,
    holdout_split,
    kl_confidence_halfwidth,
    kl_rate_curve,
    kl_rate_diff,
    kl_report,
)
from src.modelsel.order import (
    OrderModel,
    aic_penalty,
    caic,
    caic_penalty,
    degrees_of_freedom,
    get_penalty,
    mle_order_model,
    order_loglik,
    select_order,
)

__all__ = [
    "Decision",
    "KlReport",
    "OrderModel",
    "aic_penalty",
    "bmc0_kernel",
    "bmc_degrees_of_freedom",
    "bmc_kernel",
    "bmc_loglik",
    "caic",
    "caic_penalty",
    "degrees_of_freedom",
    "empirical_kernel",
    "equal_mass_assignment",
    "estimation_risk",
    "fit_order_base_models",
    "get_penalty",
    "holdout_split",
    "kernel_estimators",
    "kl_confidence_halfwidth",
    "kl_rate_curve",
    "kl_rate_diff",
    "kl_report",
    "mle_order_model",
    "order_error_experiment",
    "order_loglik",
    "risk_curve_experiment",
    "select_order",
    "uniform_kernel",
]
