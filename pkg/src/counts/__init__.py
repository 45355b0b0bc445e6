"""Trajectory-to-matrix statistics."""

from src.counts.frequency import (
    CountMatrix,
    cluster_frequency_matrix,
    cluster_transition_matrix,
    frequency_matrix,
    laplacian,
    remove_self_jumps,
    split_path,
    sum_counts,
    trim,
)

__all__ = [
    "CountMatrix",
    "cluster_frequency_matrix",
    "cluster_transition_matrix",
    "frequency_matrix",
    "laplacian",
    "remove_self_jumps",
    "split_path",
    "sum_counts",
    "trim",
]
