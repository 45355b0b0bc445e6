"""Misclassification ratio between two assignments."""

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.cluster.models import ClusterAssignment
from src.core.errors import DimensionMismatch

# Largest m for which all m! label permutations are enumerated
EXHAUSTIVE_LIMIT = 8


def confusion_matrix(truth: ClusterAssignment, estimate: ClusterAssignment) -> np.ndarray:
    """C[a, b] = number of states with true label a and estimated label b."""
    C = np.zeros((truth.m, estimate.m), dtype=np.int64)
    np.add.at(C, (truth.labels, estimate.labels), 1)
    return C


def misclassification_ratio(
    truth: ClusterAssignment, estimate: ClusterAssignment, method: str = "auto"
) -> float:
    """Fraction of misplaced states, minimized over relabelings of the estimate.

    Args:
        truth: Ground-truth assignment
        estimate: Estimated assignment
        method: ``"exhaustive"``, ``"assignment"`` or ``"auto"`` (exhaustive up to m=8)

    Returns:
        Ratio in [0, 1]

    Raises:
        DimensionMismatch: If n or m differ
    """
    if truth.n != estimate.n or truth.m != estimate.m:
        raise DimensionMismatch(
            f"Cannot compare assignments with (n, m)=({truth.n}, {truth.m}) and ({estimate.n}, {estimate.m})"
        )
    if method == "auto":
        method = "exhaustive" if truth.m <= EXHAUSTIVE_LIMIT else "assignment"

    C = confusion_matrix(truth, estimate)
    if method == "exhaustive":
        # perms[i, b] is the true label that estimated label b is mapped to
        perms = np.array(list(permutations(range(truth.m))), dtype=np.int64)
        agreement = int(C[perms, np.arange(truth.m)].sum(axis=1).max())
    elif method == "assignment":
        rows, cols = linear_sum_assignment(C, maximize=True)
        agreement = int(C[rows, cols].sum())
    else:
        raise ValueError(f"Unknown matching method: {method}. Use 'auto', 'exhaustive' or 'assignment'.")
    return 1.0 - agreement / truth.n
