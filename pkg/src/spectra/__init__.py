"""Singular-value spectra: empirical histograms and limiting densities."""

from src.spectra.density import (
    compare_density,
    limiting_density,
    quarter_circle,
    solve_fixed_point,
    stieltjes,
)
from src.spectra.empirical import (
    MatrixKind,
    Scaling,
    SpectralDensity,
    piece_histograms,
    regime_lambda,
    scaled_matrix,
    singular_values,
    sv_histogram,
)
from src.spectra.profiles import BlockVarianceProfile, frequency_profile, laplacian_profile

__all__ = [
    "BlockVarianceProfile",
    "MatrixKind",
    "Scaling",
    "SpectralDensity",
    "compare_density",
    "frequency_profile",
    "laplacian_profile",
    "limiting_density",
    "piece_histograms",
    "quarter_circle",
    "regime_lambda",
    "scaled_matrix",
    "singular_values",
    "solve_fixed_point",
    "stieltjes",
    "sv_histogram",
]
