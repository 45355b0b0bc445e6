"""Kernel estimators over the full state space and their estimation risk."""

import logging
from typing import Tuple

import numpy as np

from src.cluster.models import ClusterAssignment
from src.core.errors import DimensionMismatch, ZeroMassCluster
from src.core.kernels import model_difference
from src.core.models import SamplePath, StateKernel
from src.counts.frequency import CountMatrix, cluster_frequency_matrix, frequency_matrix

logger = logging.getLogger(__name__)


def _check_cover(counts: CountMatrix, assignment: ClusterAssignment) -> None:
    if counts.n != assignment.n:
        raise DimensionMismatch(f"Assignment covers {assignment.n} states, counts have n={counts.n}")


def empirical_kernel(counts: CountMatrix, smoothing: float = 0.0) -> np.ndarray:
    """Row-normalized counts (plus ``smoothing`` per entry); unvisited rows stay zero."""
    dense = counts.toarray().astype(float) + smoothing
    mass = dense.sum(axis=1)
    return np.divide(dense, mass[:, None], out=np.zeros_like(dense), where=mass[:, None] > 0)


def bmc_kernel(
    counts: CountMatrix,
    assignment: ClusterAssignment,
    smoothing: float = 0.0,
    allow_zero_rows: bool = False,
) -> np.ndarray:
    """Block estimator P_ij = C[a, b] / mass[a] / #V_b with a = sigma(i), b = sigma(j).

    Args:
        counts: Transition counts
        assignment: State clusters
        smoothing: Added to every cluster count
        allow_zero_rows: Leave rows of zero-mass clusters at zero instead of raising

    Raises:
        ZeroMassCluster: If a cluster is empty, or has no mass and zero rows are not allowed
    """
    _check_cover(counts, assignment)
    sizes = assignment.sizes
    if np.any(sizes == 0) and not allow_zero_rows:
        raise ZeroMassCluster(int(np.flatnonzero(sizes == 0)[0]), "has no states")
    cluster_counts = cluster_frequency_matrix(counts, assignment.labels, assignment.m) + smoothing
    mass = cluster_counts.sum(axis=1)
    if np.any(mass == 0) and not allow_zero_rows:
        raise ZeroMassCluster(int(np.flatnonzero(mass == 0)[0]), "has no outgoing transitions")
    p_hat = np.divide(
        cluster_counts, mass[:, None], out=np.zeros(cluster_counts.shape), where=mass[:, None] > 0
    )
    labels = assignment.labels
    per_state = np.divide(1.0, sizes, out=np.zeros(sizes.shape), where=sizes > 0)
    return p_hat[np.ix_(labels, labels)] * per_state[labels][None, :]


def bmc0_kernel(
    counts: CountMatrix, assignment: ClusterAssignment, smoothing: float = 0.0
) -> np.ndarray:
    """Zeroth-order block estimator: every row is eta[sigma(j)] / #V_sigma(j).

    eta is the share of column mass per cluster.

    Raises:
        ZeroMassCluster: If a cluster is empty
    """
    _check_cover(counts, assignment)
    sizes = assignment.sizes
    if np.any(sizes == 0):
        raise ZeroMassCluster(int(np.flatnonzero(sizes == 0)[0]), "has no states")
    column_mass = np.bincount(assignment.labels, weights=counts.col_sums, minlength=assignment.m)
    column_mass = column_mass + smoothing
    total = column_mass.sum()
    if total == 0:
        raise ZeroMassCluster(0, "has no incoming transitions")
    eta = column_mass / total
    row = eta[assignment.labels] / sizes[assignment.labels]
    return np.tile(row, (counts.n, 1))


def uniform_kernel(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n)


def kernel_estimators(
    counts: CountMatrix, path_length: int, assignment: ClusterAssignment, smoothing: float = 0.0
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical, block and uniform estimates of the state kernel.

    Args:
        counts: Transition counts of a path of length ``path_length``
        path_length: Number of symbols in the path
        assignment: State clusters for the block estimator
        smoothing: Additive count smoothing

    Returns:
        ``(P_empirical, P_bmc, P_uniform)`` as dense arrays; rows without data are zero

    Raises:
        ZeroMassCluster: If the block estimator has an empty or silent cluster
    """
    if path_length < 2:
        raise ValueError(f"Path length must be at least 2, got {path_length}")
    return (
        empirical_kernel(counts, smoothing),
        bmc_kernel(counts, assignment, smoothing),
        uniform_kernel(counts.n),
    )


def estimation_risk(truth, estimate) -> float:
    """Operator norm of the difference between the true and the estimated kernel."""
    return model_difference(truth, estimate)


def bmc_degrees_of_freedom(n: int, m: int, order: int) -> int:
    """Free parameters of a block model on n states: n + m(m-1) for order 1, n + m - 1 for order 0."""
    if order == 1:
        return n + m * (m - 1)
    if order == 0:
        return n + m - 1
    raise ValueError(f"Block model order must be 0 or 1, got {order}")


def equal_mass_assignment(counts: CountMatrix, k: int) -> ClusterAssignment:
    """Cut states, sorted by visit mass, into k consecutive groups of similar mass.

    States are ordered by descending column mass (ties by id). A new group
    starts once the current one would pass its share of the remaining mass, or
    when exactly one state per unopened group is left.
    """
    if not 1 <= k <= counts.n:
        raise ValueError(f"Number of groups must lie in [1, {counts.n}], got {k}")
    mass = counts.col_sums.astype(float)
    order = np.lexsort((np.arange(counts.n), -mass))
    labels = np.empty(counts.n, dtype=np.int64)
    group, acc = 0, 0.0
    remaining = mass.sum()
    target = remaining / k
    for position, state in enumerate(order):
        unopened = k - 1 - group
        if position > 0 and unopened > 0:
            if acc + mass[state] / 2 > target or counts.n - position == unopened:
                remaining -= acc
                group += 1
                acc = 0.0
                target = remaining / (k - group)
        labels[state] = group
        acc += mass[state]
    return ClusterAssignment(n=counts.n, m=k, labels=labels)


def fit_order_base_models(path: SamplePath) -> Tuple[StateKernel, StateKernel]:
    """Order-1 and order-0 maximum-likelihood kernels on the full state space.

    Rows of unvisited states in the order-1 kernel take the order-0 row.

    Returns:
        ``(order_one, order_zero)``
    """
    frequencies = np.bincount(path.symbols, minlength=path.n) / len(path)
    order_zero = np.tile(frequencies, (path.n, 1))
    order_one = empirical_kernel(frequency_matrix(path))
    missing = order_one.sum(axis=1) == 0
    if missing.any():
        logger.debug(f"Filling {int(missing.sum())} unvisited rows with the order-0 row")
        order_one[missing] = frequencies
    return StateKernel(order_one), StateKernel(order_zero)
