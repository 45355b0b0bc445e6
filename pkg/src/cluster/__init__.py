"""Spectral clustering, likelihood improvement and evaluation."""

from src.cluster.evaluation import confusion_matrix, misclassification_ratio
from src.cluster.experiments import default_robustness_model, robustness_experiment
from src.cluster.improve import cluster_pipeline, estimate_params, fit_bmc_model, improve
from src.cluster.models import ClusterAssignment, EstimatedBmcParams
from src.cluster.spectral import canonical_labels, spectral_cluster

__all__ = [
    "ClusterAssignment",
    "EstimatedBmcParams",
    "canonical_labels",
    "cluster_pipeline",
    "confusion_matrix",
    "default_robustness_model",
    "estimate_params",
    "fit_bmc_model",
    "improve",
    "misclassification_ratio",
    "robustness_experiment",
    "spectral_cluster",
]
