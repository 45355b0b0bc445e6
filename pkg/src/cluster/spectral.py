"""Spectral clustering of transition counts."""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.sparse.linalg import svds
from sklearn.cluster import KMeans

from src.cluster.models import ClusterAssignment
from src.config import settings
from src.counts.frequency import CountMatrix
from src.simulate.rng import derive_seed, make_generator

logger = logging.getLogger(__name__)

# Above this size the top triplets come from ARPACK instead of a full SVD
DENSE_SVD_LIMIT = 2000


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters in order of first appearance over state ids."""
    labels = np.asarray(labels, dtype=np.int64)
    _, first = np.unique(labels, return_index=True)
    order = labels[np.sort(first)]
    mapping = np.empty(labels.max() + 1 if labels.size else 0, dtype=np.int64)
    mapping[order] = np.arange(order.size)
    return mapping[labels]


def top_singular_triplets(
    matrix, m: int, seed: int = 0
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Largest m singular values with their left and right vectors.

    Args:
        matrix: Dense or sparse n×n matrix
        m: Number of triplets
        seed: Seed for the ARPACK start vector

    Returns:
        ``(U, s, V)`` with U and V of shape n×m and s decreasing
    """
    n = matrix.shape[0]
    if n <= DENSE_SVD_LIMIT or m >= n - 1:
        dense = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix)
        U, s, Vt = np.linalg.svd(dense.astype(float), full_matrices=False)
        return U[:, :m], s[:m], Vt[:m].T
    v0 = make_generator(seed).standard_normal(n)
    U, s, Vt = svds(matrix.astype(float), k=m, v0=v0)
    order = np.argsort(-s, kind="stable")
    return U[:, order], s[order], Vt[order].T


def spectral_embedding(counts: CountMatrix, m: int, seed: int = 0) -> Tuple[np.ndarray, int]:
    """Rows of the rank-m approximation next to rows of its transpose.

    ``[U S, V S]`` has the same pairwise distances as the concatenated rows of
    R and R^T, with 2m columns instead of 2n.

    Returns:
        ``(points, rank)`` where rank counts the numerically nonzero singular values
    """
    U, s, V = top_singular_triplets(counts.matrix, m, seed)
    tolerance = (s[0] if s.size else 0.0) * counts.n * np.finfo(float).eps
    rank = int(np.sum(s > tolerance))
    s = np.where(s > tolerance, s, 0.0)
    logger.debug(f"Top singular values: {np.round(s, 6).tolist()}")
    return np.hstack([U * s, V * s]), rank


def spectral_cluster(
    counts: CountMatrix,
    m: int,
    seed: int = 0,
    restarts: Optional[int] = None,
    max_iterations: Optional[int] = None,
    tolerance: Optional[float] = None,
    restart_index: int = 0,
) -> ClusterAssignment:
    """Cluster states by K-means on the rank-m SVD approximation of the counts.

    Args:
        counts: Transition counts, possibly trimmed
        m: Number of clusters
        seed: Integer seed
        restarts: K-means restarts (best inertia wins)
        max_iterations: Lloyd iteration cap per restart
        tolerance: Center-shift tolerance of the Lloyd iterations, i.e. the Frobenius
            norm of the center change relative to the mean per-feature variance
            of the points (sklearn's ``tol``)
        restart_index: Sub-seed key, bumped when the pipeline reruns this step

    Returns:
        Assignment labelled by first appearance over state ids

    Raises:
        ValueError: If m is outside [1, n] or the counts are all zero
    """
    if not 1 <= m <= counts.n:
        raise ValueError(f"Number of clusters must lie in [1, {counts.n}], got {m}")
    if counts.total == 0:
        raise ValueError("Cannot cluster an all-zero count matrix")
    if m == 1:
        return ClusterAssignment(n=counts.n, m=1, labels=np.zeros(counts.n, dtype=np.int64))

    points, rank = spectral_embedding(counts, m, derive_seed(seed, restart_index, 1))
    rank_deficient = rank < m
    if rank_deficient:
        logger.warning(f"Only {rank} of {m} singular values are nonzero; clustering on the available rank")

    scale = np.abs(points).max() or 1.0
    distinct = np.unique(np.round(points / scale, 10), axis=0).shape[0]
    k = min(m, distinct)
    kmeans = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=restarts or settings.kmeans_restarts,
        max_iter=max_iterations or settings.kmeans_max_iterations,
        tol=settings.kmeans_tolerance if tolerance is None else tolerance,
        algorithm="lloyd",
        random_state=derive_seed(seed, restart_index),
    )
    labels = canonical_labels(kmeans.fit_predict(points))
    if k < m:
        logger.warning(f"Embedding has {distinct} distinct points; {m - k} clusters stay empty")
    logger.info(f"Spectral clustering done: n={counts.n}, m={m}, inertia={kmeans.inertia_:.6g}")
    return ClusterAssignment(n=counts.n, m=m, labels=labels, rank_deficient=rank_deficient)
