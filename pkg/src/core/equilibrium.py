"""Ergodicity checks and equilibrium distributions."""

import logging
from math import gcd
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from src.config import settings
from src.core.errors import NonErgodic
from src.core.models import ClusterModel, Distribution, Matrix

logger = logging.getLogger(__name__)


def _support_graph(matrix: Matrix) -> sp.csr_matrix:
    graph = sp.csr_matrix(matrix, dtype=float)
    graph.eliminate_zeros()
    graph.data[:] = 1.0
    return graph


def is_irreducible(matrix: Matrix) -> bool:
    """True when the support graph is strongly connected."""
    count, _ = csgraph.connected_components(
        _support_graph(matrix), directed=True, connection="strong"
    )
    return count == 1


def period(matrix: Matrix) -> int:
    """Period of an irreducible chain.

    Uses breadth-first levels from state 0: the period is the gcd of
    ``level[u] + 1 - level[v]`` over all support edges ``u -> v``.

    Raises:
        NonErgodic: If the chain is reducible
    """
    graph = _support_graph(matrix)
    if not is_irreducible(graph):
        raise NonErgodic("Chain is reducible")
    levels = csgraph.shortest_path(graph, directed=True, unweighted=True, indices=0)
    levels = levels.astype(np.int64)
    coo = graph.tocoo()
    offsets = np.abs(levels[coo.row] + 1 - levels[coo.col])
    result = 0
    for value in np.unique(offsets):
        result = gcd(result, int(value))
        if result == 1:
            break
    return result


def is_ergodic(matrix: Matrix) -> bool:
    """Irreducible and aperiodic."""
    if not is_irreducible(matrix):
        return False
    return period(matrix) == 1


def stationary_distribution(
    matrix: Matrix,
    tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> Distribution:
    """Stationary vector of an ergodic row-stochastic matrix by power iteration.

    Args:
        matrix: Dense or sparse row-stochastic matrix
        tol: L1 change between iterates that counts as converged
        max_iterations: Iteration budget

    Returns:
        Stationary distribution

    Raises:
        NonErgodic: If the chain is reducible or periodic, or iteration does not converge
    """
    tol = settings.equilibrium_tolerance if tol is None else tol
    max_iterations = settings.equilibrium_max_iterations if max_iterations is None else max_iterations

    if not is_irreducible(matrix):
        raise NonErgodic("Chain is reducible")
    chain_period = period(matrix)
    if chain_period != 1:
        raise NonErgodic(f"Chain is periodic with period {chain_period}")

    transpose = matrix.T.tocsr() if sp.issparse(matrix) else np.asarray(matrix, dtype=float).T
    n = transpose.shape[0]
    pi = np.full(n, 1.0 / n)
    for iteration in range(1, max_iterations + 1):
        updated = transpose @ pi
        updated = np.asarray(updated).ravel()
        updated /= updated.sum()
        change = np.abs(updated - pi).sum()
        pi = updated
        if change <= tol:
            logger.debug(f"Power iteration converged after {iteration} iterations")
            break
    else:
        raise NonErgodic(f"Power iteration did not converge within {max_iterations} iterations")

    residual = np.abs(np.asarray(transpose @ pi).ravel() - pi).max()
    if residual > settings.stationarity_residual:
        raise NonErgodic(f"Stationarity residual {residual:.3e} exceeds tolerance")
    return Distribution(pi)


def cluster_equilibrium(p: np.ndarray) -> Distribution:
    """Equilibrium distribution of the cluster chain.

    Args:
        p: m×m row-stochastic cluster transition matrix

    Returns:
        Distribution pi with pi^T p = pi^T

    Raises:
        NonErgodic: If p is not ergodic
    """
    return stationary_distribution(np.asarray(p, dtype=float))


def state_equilibrium(model: ClusterModel) -> Distribution:
    """State equilibrium Pi_j = pi_sigma(j) / #V_sigma(j).

    Raises:
        NonErgodic: If the cluster chain is not ergodic
    """
    pi = cluster_equilibrium(model.p).values
    return Distribution(pi[model.sigma] / model.sizes[model.sigma])
