"""Robustness of clustering under perturbation."""

import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.cluster.evaluation import misclassification_ratio
from src.cluster.improve import cluster_pipeline
from src.cluster.models import ClusterAssignment
from src.core.models import ClusterModel, balanced_sigma
from src.core.parallel import ordered_map
from src.counts.frequency import frequency_matrix, trim
from src.simulate.perturbations import PerturbationSpec, make_perturbation
from src.simulate.rng import derive_seed
from src.simulate.samplers import default_length, sample_perturbed_bmc

logger = logging.getLogger(__name__)

ROBUSTNESS_COLUMNS = ["epsilon", "mean_E", "stderr", "seeds"]


def default_robustness_model(n: int) -> ClusterModel:
    """Two balanced clusters with p = [[0.6, 0.4], [0.4, 0.6]]."""
    return ClusterModel(m=2, sigma=balanced_sigma(n, 2), p=np.array([[0.6, 0.4], [0.4, 0.6]]))


def summarize(values: Sequence[float]) -> tuple:
    """Mean and standard error of the mean (0 for a single value)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def robustness_experiment(
    model: ClusterModel,
    perturb: PerturbationSpec,
    epsilons: Sequence[float],
    seeds: Sequence[int],
    length: Optional[int] = None,
    iterations: Optional[int] = None,
    gamma: int = 0,
    threads: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Mean misclassification ratio of the pipeline on perturbed paths.

    For every epsilon and seed a fresh perturbation kernel is drawn, a path of
    the perturbed chain is sampled and clustered, and the result is compared
    with the model's own clusters.

    Args:
        model: Ground-truth cluster model
        perturb: Perturbation family; its seed is replaced per run
        epsilons: Perturbation strengths
        seeds: Run seeds
        length: Path length (default ``floor(30 n ln n)``)
        iterations: Improvement passes
        gamma: States trimmed before clustering
        threads: Worker cap
        progress: Show a progress bar

    Returns:
        DataFrame with columns ``epsilon, mean_E, stderr, seeds``
    """
    length = length or default_length(model.n)
    truth = ClusterAssignment(n=model.n, m=model.m, labels=model.sigma)
    tasks = [(e, float(eps), int(seed)) for e, eps in enumerate(epsilons) for seed in seeds]

    def run(task) -> float:
        cell, eps, seed = task
        delta = make_perturbation(perturb.with_seed(derive_seed(seed, cell, 0)), model.n)
        path = sample_perturbed_bmc(model, delta, eps, length, seed=derive_seed(seed, cell, 1))
        counts = trim(frequency_matrix(path), gamma)
        estimate = cluster_pipeline(counts, length, model.m, iterations=iterations, seed=seed)
        return misclassification_ratio(truth, estimate)

    errors = ordered_map(run, tasks, threads=threads, progress=progress, description="robustness")

    rows = []
    for e, eps in enumerate(epsilons):
        cell = errors[e * len(seeds) : (e + 1) * len(seeds)]
        mean, stderr = summarize(cell)
        rows.append({"epsilon": float(eps), "mean_E": mean, "stderr": stderr, "seeds": len(cell)})
        logger.info(f"Robustness cell epsilon={eps}: mean E={mean:.4f} (stderr {stderr:.4f})")
    return pd.DataFrame(rows, columns=ROBUSTNESS_COLUMNS)
