"""Likelihood-based cluster improvement and the full clustering pipeline."""

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.cluster.models import ClusterAssignment, EstimatedBmcParams
from src.cluster.spectral import spectral_cluster
from src.config import settings
from src.core.errors import PathTooShort, ZeroMassCluster
from src.core.models import ClusterModel
from src.counts.frequency import CountMatrix, cluster_frequency_matrix

logger = logging.getLogger(__name__)


def _indicator(assignment: ClusterAssignment) -> sp.csr_matrix:
    n = assignment.n
    return sp.csr_matrix(
        (np.ones(n), (np.arange(n), assignment.labels)), shape=(n, assignment.m)
    )


def _weighted_logs(weights: np.ndarray, logs: np.ndarray) -> np.ndarray:
    """``weights @ logs`` with 0·log 0 = 0 and -inf where a positive weight meets log 0."""
    finite = np.isfinite(logs)
    total = weights @ np.where(finite, logs, 0.0)
    hits = (weights > 0).astype(float) @ (~finite).astype(float)
    total[hits > 0] = -np.inf
    return total


def estimate_params(
    counts: CountMatrix, path_length: int, assignment: ClusterAssignment
) -> EstimatedBmcParams:
    """Estimate cluster fractions, cluster masses and the cluster transition matrix.

    Args:
        counts: Transition counts of a path of length ``path_length``
        path_length: Number of symbols in the path
        assignment: Clusters to aggregate over

    Returns:
        Estimated parameters

    Raises:
        ZeroMassCluster: If a cluster is empty or has no outgoing transitions
    """
    sizes = assignment.sizes
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise ZeroMassCluster(int(empty[0]), "has no states")
    cluster_counts = cluster_frequency_matrix(counts, assignment.labels, assignment.m).astype(float)
    mass = cluster_counts.sum(axis=1)
    silent = np.flatnonzero(mass == 0)
    if silent.size:
        raise ZeroMassCluster(int(silent[0]), "has no outgoing transitions")
    return EstimatedBmcParams(
        alpha=sizes / assignment.n,
        pi_hat=mass / path_length,
        p_hat=cluster_counts / mass[:, None],
    )


def fit_bmc_model(
    counts: CountMatrix, path_length: int, assignment: ClusterAssignment
) -> ClusterModel:
    """Cluster model with sigma from the assignment and p from ``estimate_params``."""
    params = estimate_params(counts, path_length, assignment)
    return ClusterModel(m=assignment.m, sigma=assignment.labels, p=params.p_hat)


def improve(
    counts: CountMatrix, path_length: int, assignment: ClusterAssignment
) -> ClusterAssignment:
    """Run one batch improvement pass.

    Parameters are estimated from the input assignment and every state moves
    at once to the cluster maximizing its log-likelihood score. Ties go to the
    lowest cluster id. Empty clusters are never candidates. A state whose
    scores are all -inf keeps its label.

    Args:
        counts: Transition counts of the path
        path_length: Number of symbols in the path
        assignment: Current assignment

    Returns:
        New assignment; ``empty_clusters`` is set when a cluster lost all states
    """
    if path_length < 2:
        raise PathTooShort(f"Need a path of length at least 2, got {path_length}")
    if assignment.m == 1:
        return assignment

    n, m = assignment.n, assignment.m
    sizes = assignment.sizes
    alpha = sizes / n
    cluster_counts = cluster_frequency_matrix(counts, assignment.labels, m).astype(float)
    mass = cluster_counts.sum(axis=1)
    pi_hat = mass / path_length
    p_hat = np.divide(
        cluster_counts, mass[:, None], out=np.zeros_like(cluster_counts), where=mass[:, None] > 0
    )

    Z = _indicator(assignment)
    N = counts.matrix.astype(float)
    out_to = np.asarray((N @ Z).toarray())
    in_from = np.asarray((N.T @ Z).toarray())

    occupied = sizes > 0
    with np.errstate(divide="ignore"):
        log_p = np.log(p_hat)
        log_ratio = np.full((m, m), -np.inf)
        log_ratio[:, occupied] = np.log(p_hat[:, occupied] / alpha[occupied])
    penalty = np.zeros(m)
    penalty[occupied] = (path_length / n) * pi_hat[occupied] / alpha[occupied]

    scores = _weighted_logs(out_to, log_p.T) + _weighted_logs(in_from, log_ratio) - penalty
    scores[:, ~occupied] = -np.inf

    labels = np.argmax(scores, axis=1)
    stuck = ~np.isfinite(scores.max(axis=1))
    labels[stuck] = assignment.labels[stuck]

    moved = int(np.sum(labels != assignment.labels))
    result = ClusterAssignment(n=n, m=m, labels=labels, rank_deficient=assignment.rank_deficient)
    if result.empty_clusters:
        logger.warning(f"Improvement pass emptied cluster(s) {np.flatnonzero(result.sizes == 0).tolist()}")
    logger.debug(f"Improvement pass moved {moved} states")
    return result


def cluster_pipeline(
    counts: CountMatrix,
    path_length: int,
    m: int,
    iterations: Optional[int] = None,
    seed: int = 0,
    max_restarts: Optional[int] = None,
) -> ClusterAssignment:
    """Spectral clustering followed by up to ``iterations`` improvement passes.

    Stops early at a fixed point. When a pass empties a cluster the spectral
    step is rerun with the next restart sub-seed and improvement starts over;
    after ``max_restarts`` such reruns the last assignment without empty
    clusters is returned.

    Args:
        counts: Transition counts, possibly trimmed
        path_length: Number of symbols in the path
        m: Number of clusters
        iterations: Improvement passes (default from settings)
        seed: Integer seed
        max_restarts: Spectral reruns allowed after empty clusters

    Returns:
        Final assignment
    """
    iterations = settings.improvement_iterations if iterations is None else iterations
    max_restarts = settings.max_empty_restarts if max_restarts is None else max_restarts
    if iterations < 0:
        raise ValueError(f"iterations must be nonnegative, got {iterations}")

    restart = 0
    current = spectral_cluster(counts, m, seed=seed, restart_index=restart)
    passes = 0
    while passes < iterations:
        candidate = improve(counts, path_length, current)
        passes += 1
        if candidate.empty_clusters and not current.empty_clusters:
            if restart >= max_restarts:
                logger.warning(f"Empty clusters persist after {restart} restarts; keeping last nonempty assignment")
                break
            restart += 1
            logger.info(f"Restarting spectral step ({restart}/{max_restarts}) after empty cluster")
            current = spectral_cluster(counts, m, seed=seed, restart_index=restart)
            passes = 0
            continue
        changed = int(np.sum(candidate.labels != current.labels))
        logger.info(f"Improvement pass {passes} changed {changed} states")
        current = candidate
        if changed == 0:
            break
    return current
