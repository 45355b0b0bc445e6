"""Operations on cluster models and state kernels."""

import logging
from enum import Enum
from typing import Union

import numpy as np
import scipy.sparse as sp

from src.core.equilibrium import cluster_equilibrium
from src.core.errors import DimensionMismatch
from src.core.models import ClusterModel, SamplePath, StateKernel

logger = logging.getLogger(__name__)


class RelabelKey(str, Enum):
    """Quantity used to order clusters when relabeling."""

    SIZE = "size"
    EQUILIBRIUM = "equilibrium"


def state_kernel_of(model: ClusterModel) -> StateKernel:
    """State transition matrix P_ij = p_sigma(i),sigma(j) / #V_sigma(j).

    Args:
        model: Valid cluster model

    Returns:
        Dense n×n state kernel
    """
    sigma = model.sigma
    P = model.p[np.ix_(sigma, sigma)] / model.sizes[sigma][None, :]
    return StateKernel(P)


def relabel_clusters(model: ClusterModel, key: Union[RelabelKey, str]) -> ClusterModel:
    """Renumber clusters in decreasing order of size or equilibrium mass.

    Ties keep the lower original cluster id first.

    Args:
        model: Valid cluster model
        key: ``size`` or ``equilibrium``

    Returns:
        Model with sigma and p permuted consistently
    """
    key = RelabelKey(key)
    if key is RelabelKey.SIZE:
        weights = model.sizes.astype(float)
    else:
        weights = cluster_equilibrium(model.p).values
    order = np.argsort(-weights, kind="stable")
    new_label = np.empty(model.m, dtype=np.int64)
    new_label[order] = np.arange(model.m)
    return ClusterModel(
        m=model.m,
        sigma=new_label[model.sigma],
        p=model.p[np.ix_(order, order)],
    )


def cluster_path(path: SamplePath, sigma: np.ndarray, m: int) -> SamplePath:
    """Map a state path to its cluster path over the alphabet {0..m-1}.

    Raises:
        DimensionMismatch: If sigma does not cover the path's alphabet
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.size != path.n:
        raise DimensionMismatch(f"Cluster map covers {sigma.size} states, path has n={path.n}")
    return SamplePath(n=m, symbols=sigma[path.symbols])


def model_difference(
    a: Union[StateKernel, np.ndarray, sp.spmatrix],
    b: Union[StateKernel, np.ndarray, sp.spmatrix],
) -> float:
    """Operator 2-norm of the difference of two n×n matrices.

    Raises:
        DimensionMismatch: If shapes differ
    """
    left = a.toarray() if isinstance(a, StateKernel) else _dense(a)
    right = b.toarray() if isinstance(b, StateKernel) else _dense(b)
    if left.shape != right.shape:
        raise DimensionMismatch(f"Cannot compare {left.shape} with {right.shape}")
    return float(np.linalg.norm(left - right, ord=2))


def _dense(matrix) -> np.ndarray:
    if sp.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float)
