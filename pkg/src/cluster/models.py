"""Data models for cluster assignments and estimated parameters."""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.core.errors import InvalidModel


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Label map from states to clusters.

    Attributes:
        n: Number of states
        m: Number of clusters
        labels: Cluster id per state
        rank_deficient: The spectral step found fewer than m nonzero singular values
        empty_clusters: Some cluster has no states
    """

    n: int
    m: int
    labels: np.ndarray
    rank_deficient: bool = False
    empty_clusters: bool = False

    def __post_init__(self):
        labels = np.asarray(self.labels).astype(np.int64)
        if labels.shape != (int(self.n),):
            raise InvalidModel(f"Expected {self.n} labels, got shape {labels.shape}")
        if int(self.m) < 1:
            raise InvalidModel(f"Number of clusters must be positive, got {self.m}")
        if labels.size and (labels.min() < 0 or labels.max() >= int(self.m)):
            raise InvalidModel(f"Labels outside [0, {self.m})")
        labels.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "labels", labels)
        sizes = np.bincount(labels, minlength=self.m)
        object.__setattr__(self, "empty_clusters", bool(self.empty_clusters or np.any(sizes == 0)))

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.m)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    def to_dict(self) -> Dict:
        """Convert to the JSON layout ``{"n", "m", "labels"}``."""
        return {"n": self.n, "m": self.m, "labels": [int(k) for k in self.labels]}

    @classmethod
    def from_dict(cls, data: Dict) -> "ClusterAssignment":
        return cls(n=data["n"], m=data["m"], labels=np.asarray(data["labels"]))


@dataclass(frozen=True, eq=False)
class EstimatedBmcParams:
    """Cluster-level parameters estimated from counts and an assignment.

    Attributes:
        alpha: Fraction of states per cluster
        pi_hat: Outgoing transition mass per cluster divided by the path length
        p_hat: Row-normalized cluster transition counts
    """

    alpha: np.ndarray
    pi_hat: np.ndarray
    p_hat: np.ndarray

    def to_dict(self) -> Dict:
        return {
            "alpha": [float(v) for v in self.alpha],
            "pi_hat": [float(v) for v in self.pi_hat],
            "p_hat": [[float(v) for v in row] for row in self.p_hat],
        }
