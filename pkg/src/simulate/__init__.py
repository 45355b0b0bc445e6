"""Seeded samplers and perturbation kernels."""

from src.core.models import SamplePath
from src.simulate.perturbations import (
    PerturbationKind,
    PerturbationSpec,
    get_perturbation_builder,
    make_perturbation,
    make_zero_order_perturbation,
    parse_perturbation,
)
from src.simulate.rng import derive_seed, make_generator, make_streams, seed_sequence
from src.simulate.samplers import (
    EQUILIBRIUM,
    dcbmc_kernel,
    default_length,
    exponential_weights,
    sample_bmc,
    sample_bmc0,
    sample_dcbmc,
    sample_mc,
    sample_mixture,
    sample_perturbed_bmc,
    sample_rth_order,
)

__all__ = [
    "EQUILIBRIUM",
    "PerturbationKind",
    "PerturbationSpec",
    "SamplePath",
    "dcbmc_kernel",
    "default_length",
    "derive_seed",
    "exponential_weights",
    "get_perturbation_builder",
    "make_generator",
    "make_perturbation",
    "make_streams",
    "make_zero_order_perturbation",
    "parse_perturbation",
    "sample_bmc",
    "sample_bmc0",
    "sample_dcbmc",
    "sample_mc",
    "sample_mixture",
    "sample_perturbed_bmc",
    "sample_rth_order",
    "seed_sequence",
]
