"""Block variance profiles of the scaled Laplacian and frequency matrices."""

import logging
from dataclasses import dataclass

import numpy as np

from src.core.equilibrium import cluster_equilibrium
from src.core.errors import InvalidModel
from src.core.models import ClusterModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BlockVarianceProfile:
    """Per-block variance S of a random matrix with block sizes alpha.

    Attributes:
        S: m×m nonnegative variance profile
        alpha: Relative block sizes, positive and summing to 1
    """

    S: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        alpha = np.array(self.alpha, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] != alpha.size:
            raise InvalidModel(f"Profile of shape {S.shape} does not match {alpha.size} block sizes")
        if not np.all(np.isfinite(S)) or np.any(S < 0):
            raise InvalidModel("Variance profile must be finite and nonnegative")
        if np.any(alpha <= 0) or abs(alpha.sum() - 1) > 1e-9:
            raise InvalidModel("Block sizes must be positive and sum to 1")
        S.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "alpha", alpha)

    @property
    def m(self) -> int:
        return int(self.alpha.size)


def _check_lambda(lam: float) -> None:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")


def laplacian_profile(model: ClusterModel, lam: float) -> BlockVarianceProfile:
    """S_kl = p_kl / (lambda pi_l) for sqrt(n) times the normalized Laplacian.

    Raises:
        NonErgodic: If the cluster chain is not ergodic
    """
    _check_lambda(lam)
    pi = cluster_equilibrium(model.p).values
    S = model.p / (lam * pi[None, :])
    return BlockVarianceProfile(S=S, alpha=model.sizes / model.n)


def frequency_profile(model: ClusterModel, lam: float) -> BlockVarianceProfile:
    """S_kl = lambda pi_k p_kl / (alpha_k alpha_l) for the frequency matrix over sqrt(n).

    Raises:
        NonErgodic: If the cluster chain is not ergodic
    """
    _check_lambda(lam)
    pi = cluster_equilibrium(model.p).values
    alpha = model.sizes / model.n
    S = lam * pi[:, None] * model.p / (alpha[:, None] * alpha[None, :])
    return BlockVarianceProfile(S=S, alpha=alpha)
