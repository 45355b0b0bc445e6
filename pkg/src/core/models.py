"""Data models for block Markov chains."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.config import settings
from src.core.errors import InvalidModel

logger = logging.getLogger(__name__)

Matrix = Union[np.ndarray, sp.spmatrix]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def validate_probabilities(values: np.ndarray, what: str) -> np.ndarray:
    """Check a probability vector and renormalize small round-off.

    Args:
        values: Candidate probability vector
        what: Name used in error messages

    Returns:
        Float copy summing to one

    Raises:
        InvalidModel: If entries are negative, non-finite, or the sum is off by more
            than the renormalization tolerance
    """
    vector = np.array(values, dtype=float).ravel()
    if vector.size == 0:
        raise InvalidModel(f"{what} is empty")
    if not np.all(np.isfinite(vector)) or np.any(vector < 0):
        raise InvalidModel(f"{what} has negative or non-finite entries")
    deviation = abs(vector.sum() - 1.0)
    if deviation > settings.renormalize_tolerance:
        raise InvalidModel(f"{what} sums to {vector.sum():.12g}, not 1")
    if deviation > settings.probability_tolerance:
        logger.warning(f"Renormalizing {what} (deviation {deviation:.2e})")
        vector = vector / vector.sum()
    return vector


def validate_stochastic(
    matrix: Matrix, what: str, allow_zero_rows: bool = False, square: bool = True
) -> Matrix:
    """Check that a matrix is row-stochastic, renormalizing small round-off.

    Args:
        matrix: Dense array or scipy sparse matrix
        what: Name used in error messages
        allow_zero_rows: Accept rows that are entirely zero
        square: Require a square matrix

    Returns:
        Validated float matrix (CSR when the input was sparse)

    Raises:
        InvalidModel: On shape, range or row-sum violations
    """
    if sp.issparse(matrix):
        checked = sp.csr_matrix(matrix, dtype=float)
        checked.sum_duplicates()
        checked.sort_indices()
        data = checked.data
    else:
        checked = np.array(matrix, dtype=float)
        data = checked
    if checked.ndim != 2 or (square and checked.shape[0] != checked.shape[1]):
        raise InvalidModel(f"{what} has invalid shape {checked.shape}")
    if not np.all(np.isfinite(data)) or np.any(data < 0) or np.any(data > 1):
        raise InvalidModel(f"{what} has entries outside [0, 1]")

    row_sums = np.asarray(checked.sum(axis=1)).ravel()
    zero_rows = row_sums == 0
    if np.any(zero_rows) and not allow_zero_rows:
        raise InvalidModel(f"{what} has all-zero row {int(np.flatnonzero(zero_rows)[0])}")
    deviation = np.where(zero_rows, 0.0, np.abs(row_sums - 1.0))
    worst = float(deviation.max(initial=0.0))
    if worst > settings.renormalize_tolerance:
        row = int(np.argmax(deviation))
        raise InvalidModel(f"{what} row {row} sums to {row_sums[row]:.12g}, not 1")
    if worst > settings.probability_tolerance:
        logger.warning(f"Renormalizing rows of {what} (max deviation {worst:.2e})")
        scale = np.where(zero_rows, 1.0, row_sums)
        if sp.issparse(checked):
            checked = sp.csr_matrix(sp.diags(1.0 / scale) @ checked)
        else:
            checked = checked / scale[:, None]
    return checked


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over a finite index set."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _frozen(validate_probabilities(self.values, "distribution"))
        )

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, index):
        return self.values[index]

    def to_list(self) -> List[float]:
        return [float(v) for v in self.values]


@dataclass(frozen=True, eq=False)
class StateKernel:
    """Row-stochastic n×n transition matrix, dense or sparse."""

    P: Matrix

    def __post_init__(self):
        checked = validate_stochastic(self.P, "state kernel")
        if not sp.issparse(checked):
            checked = _frozen(checked)
        object.__setattr__(self, "P", checked)

    @property
    def n(self) -> int:
        return int(self.P.shape[0])

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.P)

    def toarray(self) -> np.ndarray:
        """Dense copy of the kernel."""
        if self.is_sparse:
            return self.P.toarray()
        return np.array(self.P)


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Block Markov chain parameters: cluster map sigma and cluster kernel p.

    Attributes:
        m: Number of clusters
        sigma: Cluster id of each state, length n
        p: m×m row-stochastic cluster transition matrix
    """

    m: int
    sigma: np.ndarray
    p: np.ndarray
    sizes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.m) < 1:
            raise InvalidModel(f"Number of clusters must be positive, got {self.m}")
        m = int(self.m)
        sigma = np.asarray(self.sigma)
        if sigma.ndim != 1 or sigma.size == 0:
            raise InvalidModel("sigma must be a nonempty vector of cluster ids")
        if not np.issubdtype(sigma.dtype, np.integer):
            if not np.all(np.equal(np.mod(sigma, 1), 0)):
                raise InvalidModel("sigma must contain integer cluster ids")
        sigma = sigma.astype(np.int64)
        if sigma.min() < 0 or sigma.max() >= m:
            raise InvalidModel(f"sigma has cluster ids outside [0, {m})")
        sizes = np.bincount(sigma, minlength=m)
        if np.any(sizes == 0):
            empty = int(np.flatnonzero(sizes == 0)[0])
            raise InvalidModel(f"Cluster {empty} is empty")
        p = validate_stochastic(np.asarray(self.p, dtype=float), "cluster transition matrix")
        if p.shape != (m, m):
            raise InvalidModel(f"p must be {m}x{m}, got {p.shape}")

        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", _frozen(sigma))
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "sizes", _frozen(sizes))

    @property
    def n(self) -> int:
        return int(self.sigma.size)

    def members(self, cluster: int) -> np.ndarray:
        """State ids of one cluster in increasing order."""
        return np.flatnonzero(self.sigma == cluster)

    def to_dict(self) -> Dict:
        """Convert to the JSON layout ``{"m", "sigma", "p"}``."""
        return {
            "m": self.m,
            "sigma": [int(k) for k in self.sigma],
            "p": [[float(v) for v in row] for row in self.p],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ClusterModel":
        return cls(m=data["m"], sigma=np.asarray(data["sigma"]), p=np.asarray(data["p"]))


def balanced_sigma(n: int, m: int) -> np.ndarray:
    """Contiguous near-equal blocks: state i goes to cluster floor(i*m/n).

    Args:
        n: Number of states
        m: Number of clusters

    Returns:
        Cluster id per state

    Raises:
        InvalidModel: If m is not in [1, n]
    """
    if m < 1 or m > n:
        raise InvalidModel(f"Cannot split {n} states into {m} nonempty clusters")
    return (np.arange(n, dtype=np.int64) * m) // n


def sigma_from_sizes(sizes: Sequence[int]) -> np.ndarray:
    """Cluster map with contiguous blocks of the given sizes."""
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 0):
        raise InvalidModel("Cluster sizes must be a nonempty vector of nonnegative ints")
    return np.repeat(np.arange(sizes.size, dtype=np.int64), sizes)


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Observed trajectory X_1..X_l over the alphabet {0..n-1}.

    Attributes:
        n: Alphabet size
        symbols: State ids, length l >= 1
        vocabulary: Optional symbol strings, index = id
    """

    n: int
    symbols: np.ndarray
    vocabulary: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        n = int(self.n)
        symbols = np.asarray(self.symbols)
        if n < 1:
            raise InvalidModel(f"Alphabet size must be positive, got {n}")
        if symbols.ndim != 1 or symbols.size == 0:
            raise InvalidModel("A sample path needs at least one symbol")
        symbols = symbols.astype(np.int64)
        if symbols.min() < 0 or symbols.max() >= n:
            raise InvalidModel(f"Path contains ids outside [0, {n})")
        vocabulary = self.vocabulary
        if vocabulary is not None:
            vocabulary = tuple(str(token) for token in vocabulary)
            if len(vocabulary) != n:
                raise InvalidModel(f"Vocabulary has {len(vocabulary)} entries for n={n}")
            if len(set(vocabulary)) != n:
                raise InvalidModel("Vocabulary entries must be distinct")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "symbols", _frozen(symbols))
        object.__setattr__(self, "vocabulary", vocabulary)

    def __len__(self) -> int:
        return int(self.symbols.size)

    def decode(self) -> List[str]:
        """Symbol strings of the path (ids as strings when there is no vocabulary)."""
        if self.vocabulary is None:
            return [str(int(s)) for s in self.symbols]
        return [self.vocabulary[int(s)] for s in self.symbols]
