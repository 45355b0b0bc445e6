"""Perturbation kernels for perturbed block Markov chains."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Optional

import numpy as np

from src.config import settings
from src.core.errors import InvalidModel
from src.core.models import StateKernel
from src.simulate.rng import make_generator

logger = logging.getLogger(__name__)


class PerturbationKind(str, Enum):
    """Supported nuisance kernels."""

    UNIFORM_STOCHASTIC = "uniform_stochastic"
    DEGREE0 = "degree0"
    HEAVY_TAILED = "heavy_tailed"
    SPARSE = "sparse"


@dataclass(frozen=True)
class PerturbationSpec:
    """Kind and parameters of a perturbation kernel.

    Attributes:
        kind: Kernel family
        s: Zipf exponent (heavy_tailed)
        d: Average out-degree (sparse)
        c: Offset of the sparse kernel; every entry gets c/n before normalization
        seed: Seed of the kernel draw
    """

    kind: PerturbationKind = PerturbationKind.HEAVY_TAILED
    s: float = 1.5
    d: float = 5.0
    c: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PerturbationKind(self.kind))
        if self.s <= 1:
            raise InvalidModel(f"Zipf exponent must exceed 1, got {self.s}")
        if self.d <= 0:
            raise InvalidModel(f"Average degree must be positive, got {self.d}")
        if self.c <= 0:
            raise InvalidModel(f"Offset must be positive, got {self.c}")

    def with_seed(self, seed: int) -> "PerturbationSpec":
        return PerturbationSpec(kind=self.kind, s=self.s, d=self.d, c=self.c, seed=seed)

    def to_flag(self) -> str:
        """Render as ``kind=...,s=...`` for provenance records."""
        return f"kind={self.kind.value},s={self.s},d={self.d},c={self.c},seed={self.seed}"


def parse_perturbation(flag: str) -> PerturbationSpec:
    """Parse ``kind=heavy_tailed,s=1.5`` into a PerturbationSpec.

    Raises:
        ValueError: On malformed pairs or unknown keys
    """
    fields: Dict[str, object] = {}
    casts = {"kind": str, "s": float, "d": float, "c": float, "seed": int}
    for part in filter(None, (item.strip() for item in flag.split(","))):
        if "=" not in part:
            raise ValueError(f"Expected key=value in perturbation flag, got '{part}'")
        key, value = (token.strip() for token in part.split("=", 1))
        if key not in casts:
            raise ValueError(f"Unknown perturbation parameter '{key}'")
        fields[key] = casts[key](value)
    return PerturbationSpec(**fields)


@lru_cache(maxsize=8)
def _zipf_cdf(s: float, support: int) -> np.ndarray:
    weights = np.arange(1, support + 1, dtype=float) ** (-s)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    return cdf


def zipf_variates(rng: np.random.Generator, s: float, size, support: Optional[int] = None) -> np.ndarray:
    """Zipf(s) draws on {1..support} by inverse CDF."""
    support = support or settings.zipf_support
    cdf = _zipf_cdf(float(s), int(support))
    index = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(index, support - 1) + 1


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    sums = X.sum(axis=1)
    empty = sums <= 0
    if np.any(empty):
        logger.warning(f"Replacing {int(empty.sum())} zero rows with uniform rows")
        X[empty] = 1.0
        sums = X.sum(axis=1)
    return X / sums[:, None]


class PerturbationBuilder(ABC):
    """Abstract base class for perturbation kernel families."""

    def __init__(self, spec: PerturbationSpec):
        self.spec = spec

    @abstractmethod
    def weights(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an n×n nonnegative weight matrix before row normalization."""
        pass

    def build(self, n: int) -> StateKernel:
        """Row-normalized kernel, deterministic given the spec's seed."""
        if n < 2:
            raise InvalidModel(f"Perturbation kernels need n >= 2, got {n}")
        rng = make_generator(self.spec.seed)
        return StateKernel(_normalize_rows(self.weights(n, rng).astype(float)))


class UniformStochasticBuilder(PerturbationBuilder):
    """Rows uniform on the simplex: Dirichlet(1/n, ..., 1/n)."""

    def weights(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(1.0 / n, 1.0, size=(n, n))


class DegreeZeroBuilder(PerturbationBuilder):
    """Identical rows from normalized Exp(1) draws."""

    def weights(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.tile(rng.exponential(1.0, size=n), (n, 1))


class HeavyTailedBuilder(PerturbationBuilder):
    """Independent Zipf(s) weights, normalized per row."""

    def weights(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return zipf_variates(rng, self.spec.s, (n, n)).astype(float)


class SparseGraphBuilder(PerturbationBuilder):
    """Directed Erdos-Renyi adjacency plus c/n on every entry.

    Each of the n^2 ordered pairs, self-loops included, is an edge with
    probability d/n, so the average out-degree is d.
    """

    def weights(self, n: int, rng: np.random.Generator) -> np.ndarray:
        probability = min(1.0, self.spec.d / n)
        adjacency = (rng.random((n, n)) < probability).astype(float)
        return adjacency + self.spec.c / n


_BUILDERS = {
    PerturbationKind.UNIFORM_STOCHASTIC: UniformStochasticBuilder,
    PerturbationKind.DEGREE0: DegreeZeroBuilder,
    PerturbationKind.HEAVY_TAILED: HeavyTailedBuilder,
    PerturbationKind.SPARSE: SparseGraphBuilder,
}


def get_perturbation_builder(spec: PerturbationSpec) -> PerturbationBuilder:
    """Get the builder for a perturbation spec.

    Raises:
        ValueError: If the kind is unknown
    """
    builder = _BUILDERS.get(PerturbationKind(spec.kind))
    if builder is None:
        raise ValueError(f"Unknown perturbation kind: {spec.kind}")
    return builder(spec)


def make_perturbation(spec: PerturbationSpec, n: int) -> StateKernel:
    """Build the n×n perturbation kernel described by ``spec``."""
    kernel = get_perturbation_builder(spec).build(n)
    logger.debug(f"Built {spec.kind.value} perturbation kernel on {n} states")
    return kernel


def make_zero_order_perturbation(spec: PerturbationSpec, n: int) -> StateKernel:
    """Kernel of the requested kind with every row replaced by its first row."""
    row = make_perturbation(spec, n).toarray()[0]
    return StateKernel(np.tile(row, (n, 1)))
