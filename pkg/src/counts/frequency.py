"""Transition counts and derived matrices."""

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterator, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.core.errors import DimensionMismatch, InvalidModel, PathTooShort
from src.core.models import SamplePath

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CountMatrix:
    """Sparse n×n transition counts with an optional set of trimmed states.

    Attributes:
        n: Number of states
        matrix: CSR matrix of nonnegative integer counts with sorted indices
        trimmed: States whose rows and columns were zeroed
    """

    n: int
    matrix: sp.csr_matrix
    trimmed: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=np.int64)
        if matrix.shape != (self.n, self.n):
            raise DimensionMismatch(f"Count matrix shape {matrix.shape} does not match n={self.n}")
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        matrix.sort_indices()
        if matrix.nnz and matrix.data.min() < 0:
            raise InvalidModel("Counts must be nonnegative")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "trimmed", frozenset(int(s) for s in self.trimmed))

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    @property
    def col_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    @property
    def degrees(self) -> np.ndarray:
        """In-count plus out-count per state."""
        return self.row_sums + self.col_sums

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def triplets(self) -> Iterator[Tuple[int, int, int]]:
        """Nonzero entries ``(i, j, count)`` in row-major order."""
        coo = self.matrix.tocoo()
        for i, j, count in zip(coo.row, coo.col, coo.data):
            yield int(i), int(j), int(count)


def frequency_matrix(path: SamplePath) -> CountMatrix:
    """Count transitions N_ij = #{t < l : X_t = i, X_t+1 = j}.

    Raises:
        PathTooShort: If the path has fewer than two symbols
    """
    if len(path) < 2:
        raise PathTooShort(f"Need at least 2 symbols to count transitions, got {len(path)}")
    x = path.symbols
    ones = np.ones(x.size - 1, dtype=np.int64)
    matrix = sp.coo_matrix((ones, (x[:-1], x[1:])), shape=(path.n, path.n)).tocsr()
    return CountMatrix(n=path.n, matrix=matrix)


def trim(counts: CountMatrix, gamma: int) -> CountMatrix:
    """Zero the rows and columns of the gamma states with the largest degree.

    Degree is in-count plus out-count; ties go to the lower state id.
    """
    if not 0 <= gamma <= counts.n:
        raise ValueError(f"gamma must lie in [0, {counts.n}], got {gamma}")
    if gamma == 0:
        return counts
    ids = np.arange(counts.n)
    order = np.lexsort((ids, -counts.degrees))
    removed = order[:gamma]
    keep = np.ones(counts.n, dtype=np.int64)
    keep[removed] = 0
    mask = sp.diags(keep)
    matrix = mask @ counts.matrix @ mask
    logger.info(f"Trimmed {gamma} highest-degree states")
    return CountMatrix(
        n=counts.n,
        matrix=matrix,
        trimmed=counts.trimmed | frozenset(int(s) for s in removed),
    )


def laplacian(counts: CountMatrix) -> np.ndarray:
    """Normalized Laplacian L_ij = N_ij / sqrt(rowsum_i * colsum_j), 0 where N_ij = 0."""
    rows = counts.row_sums.astype(float)
    cols = counts.col_sums.astype(float)
    row_scale = np.divide(1.0, np.sqrt(rows), out=np.zeros_like(rows), where=rows > 0)
    col_scale = np.divide(1.0, np.sqrt(cols), out=np.zeros_like(cols), where=cols > 0)
    scaled = sp.diags(row_scale) @ counts.matrix.astype(float) @ sp.diags(col_scale)
    return np.asarray(scaled.toarray())


def sum_counts(matrices: Sequence[CountMatrix], zero_diagonal: bool = False) -> CountMatrix:
    """Entrywise sum of count matrices, optionally with the diagonal zeroed.

    Raises:
        DimensionMismatch: If the matrices differ in size
    """
    if not matrices:
        raise ValueError("Need at least one count matrix to sum")
    n = matrices[0].n
    if any(counts.n != n for counts in matrices):
        raise DimensionMismatch("Count matrices must share the number of states")
    total = matrices[0].matrix.copy()
    for counts in matrices[1:]:
        total = total + counts.matrix
    if zero_diagonal:
        total = sp.csr_matrix(total - sp.diags(total.diagonal()))
    trimmed = frozenset().union(*(counts.trimmed for counts in matrices))
    return CountMatrix(n=n, matrix=total, trimmed=trimmed)


def cluster_frequency_matrix(counts: CountMatrix, sigma: np.ndarray, m: int) -> np.ndarray:
    """Cluster-level counts N_Va,Vb as a dense m×m integer array."""
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.size != counts.n:
        raise DimensionMismatch(f"Cluster map covers {sigma.size} states, counts have n={counts.n}")
    indicator = sp.csr_matrix(
        (np.ones(counts.n, dtype=np.int64), (np.arange(counts.n), sigma)), shape=(counts.n, m)
    )
    return np.asarray((indicator.T @ counts.matrix @ indicator).toarray(), dtype=np.int64)


def cluster_transition_matrix(counts: CountMatrix, sigma: np.ndarray, m: int) -> np.ndarray:
    """Row-normalized cluster counts; rows with zero mass stay zero."""
    cluster_counts = cluster_frequency_matrix(counts, sigma, m).astype(float)
    mass = cluster_counts.sum(axis=1)
    return np.divide(
        cluster_counts, mass[:, None], out=np.zeros_like(cluster_counts), where=mass[:, None] > 0
    )


def remove_self_jumps(path: SamplePath) -> SamplePath:
    """Collapse maximal runs of a repeated symbol to one occurrence."""
    x = path.symbols
    keep = np.concatenate([[True], x[1:] != x[:-1]])
    return SamplePath(n=path.n, symbols=x[keep], vocabulary=path.vocabulary)


def split_path(path: SamplePath, pieces: int) -> List[SamplePath]:
    """Consecutive pieces of equal length; the remainder is dropped."""
    if pieces < 1:
        raise ValueError(f"pieces must be positive, got {pieces}")
    size = len(path) // pieces
    if size < 1:
        raise PathTooShort(f"Path of length {len(path)} cannot be split into {pieces} pieces")
    return [
        SamplePath(n=path.n, symbols=path.symbols[k * size : (k + 1) * size], vocabulary=path.vocabulary)
        for k in range(pieces)
    ]
