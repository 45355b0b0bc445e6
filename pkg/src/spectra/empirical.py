"""Empirical singular-value statistics of count matrices."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from src.config import settings
from src.core.models import SamplePath
from src.counts.frequency import CountMatrix, frequency_matrix, laplacian, split_path

logger = logging.getLogger(__name__)


class MatrixKind(str, Enum):
    """Which count-derived matrix to analyze."""

    LAPLACIAN = "laplacian"
    FREQUENCY = "frequency"


class Scaling(str, Enum):
    """Scaling applied to singular values before binning."""

    SQRT_N = "sqrt_n"
    INV_SQRT_N = "inv_sqrt_n"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Density on a grid, either a histogram or a sampled curve.

    Attributes:
        grid: Increasing abscissae (bin centers for histograms)
        density: Density values, nonnegative
        eta: Imaginary offset used by the solver, None for histograms
        edges: Bin edges for histograms, None for curves
    """

    grid: np.ndarray
    density: np.ndarray
    eta: Optional[float] = None
    edges: Optional[np.ndarray] = None

    @property
    def is_histogram(self) -> bool:
        return self.edges is not None

    def mass(self) -> float:
        """Total mass: exact for histograms, trapezoid rule for curves."""
        if self.is_histogram:
            return float(np.sum(self.density * np.diff(self.edges)))
        return float(trapezoid(self.density, self.grid))

    def to_frame(self) -> pd.DataFrame:
        """Two-column ``x,f`` table."""
        return pd.DataFrame({"x": self.grid, "f": self.density})


def singular_values(matrix) -> np.ndarray:
    """All singular values in decreasing order."""
    dense = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix, dtype=float)
    return np.linalg.svd(dense, compute_uv=False)


def scaled_matrix(counts: CountMatrix, kind: Union[MatrixKind, str]) -> np.ndarray:
    """sqrt(n) times the normalized Laplacian, or the frequency matrix over sqrt(n)."""
    kind = MatrixKind(kind)
    if kind == MatrixKind.LAPLACIAN:
        return np.sqrt(counts.n) * laplacian(counts)
    return counts.toarray().astype(float) / np.sqrt(counts.n)


def regime_lambda(length: int, n: int) -> Tuple[float, bool]:
    """Density parameter lambda = l / n^2 and whether it is below the regime threshold."""
    lam = length / n**2
    out_of_regime = lam < settings.regime_threshold
    if out_of_regime:
        logger.warning(f"lambda = {lam:.4g} is below {settings.regime_threshold}; comparison is out of regime")
    return lam, out_of_regime


def _scale(values: np.ndarray, scaling: Scaling, n: int) -> np.ndarray:
    if scaling == Scaling.SQRT_N:
        return values * np.sqrt(n)
    if scaling == Scaling.INV_SQRT_N:
        return values / np.sqrt(n)
    return values


def _kept(values: np.ndarray, drop_leading: int) -> np.ndarray:
    values = np.sort(np.asarray(values, dtype=float))[::-1]
    if not 0 <= drop_leading < values.size:
        raise ValueError(f"Cannot drop {drop_leading} of {values.size} singular values")
    return values[drop_leading:]


def _histogram(values: np.ndarray, edges) -> SpectralDensity:
    if np.ptp(values) == 0 and np.ndim(edges) == 0:
        edges = np.array([values[0] - 0.5, values[0] + 0.5])
        return SpectralDensity(grid=np.array([values[0]]), density=np.array([1.0]), edges=edges)
    density, edges = np.histogram(values, bins=edges, density=True)
    return SpectralDensity(grid=(edges[:-1] + edges[1:]) / 2, density=density, edges=edges)


def sv_histogram(
    values: np.ndarray,
    scaling: Union[Scaling, str] = Scaling.NONE,
    bins: Optional[int] = None,
    drop_leading: int = 0,
    n: Optional[int] = None,
) -> SpectralDensity:
    """Density histogram of the scaled singular values without the largest ``drop_leading``.

    Args:
        values: Singular values
        scaling: ``sqrt_n``, ``inv_sqrt_n`` or ``none``
        bins: Number of bins
        drop_leading: Number of leading values treated as signal
        n: Matrix size for scaling (defaults to the number of values)

    Returns:
        Histogram density; a single unit bin when all kept values coincide
    """
    n = n or len(values)
    kept = _scale(_kept(values, drop_leading), Scaling(scaling), n)
    return _histogram(kept, bins or settings.bins)


def piece_histograms(
    path: SamplePath,
    kind: Union[MatrixKind, str] = MatrixKind.LAPLACIAN,
    pieces: int = 10,
    bins: Optional[int] = None,
    drop_leading: int = 0,
) -> SpectralDensity:
    """Average histogram over equal consecutive pieces of the path.

    Each piece gives its own scaled matrix; all histograms share bin edges.
    """
    spectra = []
    for piece in split_path(path, pieces):
        values = singular_values(scaled_matrix(frequency_matrix(piece), kind))
        spectra.append(_kept(values, drop_leading))
    pooled = np.concatenate(spectra)
    if np.ptp(pooled) == 0:
        return _histogram(pooled, bins or settings.bins)
    edges = np.histogram_bin_edges(pooled, bins=bins or settings.bins)
    densities = [np.histogram(values, bins=edges, density=True)[0] for values in spectra]
    logger.info(f"Averaged singular-value histograms over {pieces} pieces")
    return SpectralDensity(
        grid=(edges[:-1] + edges[1:]) / 2, density=np.mean(densities, axis=0), edges=edges
    )
