"""Log-likelihoods and divergence-rate comparison of two kernels on a path."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.sparse as sp

from src.config import settings
from src.core.errors import (
    DimensionMismatch,
    InvalidZ,
    PathTooShort,
    SupportMismatch,
    ZeroProbabilityTransition,
)
from src.core.models import ClusterModel, SamplePath, StateKernel

logger = logging.getLogger(__name__)

KernelLike = Union[StateKernel, np.ndarray, sp.spmatrix]


class Decision(str, Enum):
    """Outcome of a divergence-rate comparison."""

    P_BETTER = "P better"
    Q_BETTER = "Q better"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class KlReport:
    """Estimated divergence-rate difference with its confidence half-width.

    Attributes:
        d_hat: Mean log-likelihood ratio per step; positive favors P
        ci_halfwidth: Half-width of the confidence interval
        z: Confidence level input (0.05 for a 95% bound)
        delta: Largest absolute log-ratio over the common support
        tau_mix: Assumed mixing time
        length: Length of the validation path
    """

    d_hat: float
    ci_halfwidth: float
    z: float
    delta: float
    tau_mix: float
    length: int

    @property
    def decision(self) -> Decision:
        if self.d_hat > self.ci_halfwidth:
            return Decision.P_BETTER
        if self.d_hat < -self.ci_halfwidth:
            return Decision.Q_BETTER
        return Decision.INCONCLUSIVE

    def describe(self) -> str:
        """Human-readable decision line."""
        if self.decision == Decision.INCONCLUSIVE:
            return f"inconclusive at level z={self.z}"
        return f"{self.decision.value} at level z={self.z}"

    def to_dict(self) -> Dict:
        return {
            "d_hat": self.d_hat,
            "ci_halfwidth": self.ci_halfwidth,
            "z": self.z,
            "delta": self.delta,
            "tau_mix": self.tau_mix,
            "length": self.length,
            "decision": self.decision.value,
        }


def _kernel_array(kernel: KernelLike):
    return kernel.P if isinstance(kernel, StateKernel) else kernel


def _dense(kernel: KernelLike) -> np.ndarray:
    matrix = _kernel_array(kernel)
    if sp.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float)


def _entries(kernel: KernelLike, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    matrix = _kernel_array(kernel)
    if sp.issparse(matrix):
        return np.asarray(sp.csr_matrix(matrix)[rows, cols]).ravel().astype(float)
    return np.asarray(matrix, dtype=float)[rows, cols]


def bmc_loglik(path: SamplePath, model: ClusterModel) -> float:
    """Log-likelihood of the path's transitions under a block Markov chain.

    Returns:
        Sum of ln(p[a, b] / #V_b) over transitions; ``-inf`` if any has probability zero

    Raises:
        PathTooShort: If the path has fewer than two symbols
        DimensionMismatch: If the path and model disagree on n
    """
    if len(path) < 2:
        raise PathTooShort(f"Need at least 2 symbols, got {len(path)}")
    if path.n != model.n:
        raise DimensionMismatch(f"Path has n={path.n}, model has n={model.n}")
    source = model.sigma[path.symbols[:-1]]
    target = model.sigma[path.symbols[1:]]
    probabilities = model.p[source, target] / model.sizes[target]
    if np.any(probabilities == 0):
        return float("-inf")
    return float(np.sum(np.log(probabilities)))


def log_ratios(path: SamplePath, P: KernelLike, Q: KernelLike) -> np.ndarray:
    """Per-step ln P[x_t, x_t+1] - ln Q[x_t, x_t+1].

    Raises:
        ZeroProbabilityTransition: At the first transition either kernel forbids
    """
    if len(path) < 2:
        raise PathTooShort(f"Need at least 2 symbols, got {len(path)}")
    shape_p, shape_q = _kernel_array(P).shape, _kernel_array(Q).shape
    if shape_p != shape_q or shape_p[0] != path.n:
        raise DimensionMismatch(f"Kernels {shape_p} and {shape_q} do not fit a path over n={path.n}")
    rows, cols = path.symbols[:-1], path.symbols[1:]
    p_values = _entries(P, rows, cols)
    q_values = _entries(Q, rows, cols)
    for values, name in ((p_values, "P"), (q_values, "Q")):
        zero = np.flatnonzero(values <= 0)
        if zero.size:
            t = int(zero[0])
            raise ZeroProbabilityTransition(t, int(rows[t]), int(cols[t]), name)
    return np.log(p_values) - np.log(q_values)


def kl_rate_diff(path: SamplePath, P: KernelLike, Q: KernelLike) -> float:
    """Estimated difference of divergence rates, (1/l) * sum_t ln(P/Q); positive favors P."""
    return float(np.sum(log_ratios(path, P, Q)) / len(path))


def kl_rate_curve(
    path: SamplePath, P: KernelLike, Q: KernelLike, horizons: Sequence[int]
) -> pd.DataFrame:
    """Divergence-rate difference over growing prefixes of the path.

    Returns:
        DataFrame with columns ``horizon, d_hat``
    """
    cumulative = np.concatenate([[0.0], np.cumsum(log_ratios(path, P, Q))])
    rows = []
    for horizon in horizons:
        if not 2 <= horizon <= len(path):
            raise ValueError(f"Horizon must lie in [2, {len(path)}], got {horizon}")
        rows.append({"horizon": int(horizon), "d_hat": float(cumulative[horizon - 1] / horizon)})
    return pd.DataFrame(rows, columns=["horizon", "d_hat"])


def max_log_ratio(P: KernelLike, Q: KernelLike) -> float:
    """Largest |ln P_ij - ln Q_ij| over the common support.

    Raises:
        SupportMismatch: At the first entry positive in exactly one kernel
    """
    left, right = _dense(P), _dense(Q)
    if left.shape != right.shape:
        raise DimensionMismatch(f"Cannot compare {left.shape} with {right.shape}")
    mismatch = np.argwhere((left > 0) != (right > 0))
    if mismatch.size:
        i, j = mismatch[0]
        raise SupportMismatch(int(i), int(j))
    support = left > 0
    if not support.any():
        return 0.0
    return float(np.max(np.abs(np.log(left[support]) - np.log(right[support]))))


def kl_confidence_halfwidth(
    P: KernelLike,
    Q: KernelLike,
    length: int,
    tau_mix: Optional[float] = None,
    z: Optional[float] = None,
) -> float:
    """Half-width c_z = (delta / l) * sqrt(18 (tau_mix + 1) ln(2 / z)).

    Raises:
        InvalidZ: If z is outside (0, 1)
        SupportMismatch: If the kernels differ in support
    """
    tau_mix = settings.tau_mix if tau_mix is None else tau_mix
    z = settings.z if z is None else z
    if not 0 < z < 1:
        raise InvalidZ(f"Confidence level z must lie in (0, 1), got {z}")
    delta = max_log_ratio(P, Q)
    return float(delta / length * np.sqrt(18 * (tau_mix + 1) * np.log(2 / z)))


def kl_report(
    validation: SamplePath,
    P: KernelLike,
    Q: KernelLike,
    tau_mix: Optional[float] = None,
    z: Optional[float] = None,
) -> KlReport:
    """Compare P and Q on a validation path.

    Args:
        validation: Held-out path
        P: First candidate kernel
        Q: Second candidate kernel
        tau_mix: Assumed mixing time
        z: Confidence level input

    Returns:
        Report with estimate, half-width and decision
    """
    tau_mix = settings.tau_mix if tau_mix is None else tau_mix
    z = settings.z if z is None else z
    halfwidth = kl_confidence_halfwidth(P, Q, len(validation), tau_mix, z)
    report = KlReport(
        d_hat=kl_rate_diff(validation, P, Q),
        ci_halfwidth=halfwidth,
        z=z,
        delta=max_log_ratio(P, Q),
        tau_mix=tau_mix,
        length=len(validation),
    )
    logger.info(f"Divergence-rate difference {report.d_hat:.6g} +/- {halfwidth:.6g}: {report.describe()}")
    return report


def holdout_split(path: SamplePath) -> Tuple[SamplePath, SamplePath]:
    """First floor(l/2) symbols for training, the rest for validation.

    Raises:
        PathTooShort: If the path has fewer than four symbols
    """
    if len(path) < 4:
        raise PathTooShort(f"Need at least 4 symbols to split, got {len(path)}")
    half = len(path) // 2
    return (
        SamplePath(n=path.n, symbols=path.symbols[:half], vocabulary=path.vocabulary),
        SamplePath(n=path.n, symbols=path.symbols[half:], vocabulary=path.vocabulary),
    )
