"""Monte-Carlo experiments: estimation risk over path length and order-selection errors."""

import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.cluster.experiments import summarize
from src.cluster.improve import cluster_pipeline
from src.cluster.models import ClusterAssignment
from src.config import settings
from src.core.kernels import cluster_path, state_kernel_of
from src.core.models import ClusterModel, SamplePath, StateKernel
from src.core.parallel import ordered_map
from src.counts.frequency import frequency_matrix
from src.modelsel.estimators import (
    bmc_kernel,
    empirical_kernel,
    estimation_risk,
    fit_order_base_models,
    uniform_kernel,
)
from src.modelsel.order import select_order
from src.simulate.perturbations import (
    PerturbationSpec,
    make_perturbation,
    make_zero_order_perturbation,
)
from src.simulate.rng import derive_seed
from src.simulate.samplers import sample_mixture, sample_perturbed_bmc

logger = logging.getLogger(__name__)

RISK_COLUMNS = ["length", "R_emp", "R_bmc", "R_unif", "R_emp_stderr", "R_bmc_stderr", "seeds"]
ORDER_ERROR_COLUMNS = ["epsilon", "e_over", "e_under", "repetitions"]


def risk_curve_experiment(
    model: ClusterModel,
    delta: StateKernel,
    epsilon: float,
    lengths: Sequence[int],
    seeds: Sequence[int],
    iterations: Optional[int] = None,
    threads: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Operator-norm risk of the empirical, block and uniform estimators.

    The ground truth is (1 - epsilon) P_bmc + epsilon delta. For every length
    and seed a path is sampled, clustered with the full pipeline and the three
    estimators are compared against the ground truth.

    Args:
        model: Block component of the ground truth
        delta: Perturbation kernel
        epsilon: Perturbation strength
        lengths: Path lengths
        seeds: Run seeds
        iterations: Improvement passes
        threads: Worker cap
        progress: Show a progress bar

    Returns:
        DataFrame with columns ``length, R_emp, R_bmc, R_unif, R_emp_stderr, R_bmc_stderr, seeds``
    """
    truth = (1 - epsilon) * state_kernel_of(model).toarray() + epsilon * delta.toarray()
    r_unif = estimation_risk(truth, uniform_kernel(model.n))
    tasks = [(c, int(length), int(seed)) for c, length in enumerate(lengths) for seed in seeds]

    def run(task):
        cell, length, seed = task
        path = sample_perturbed_bmc(model, delta, epsilon, length, seed=derive_seed(seed, cell))
        counts = frequency_matrix(path)
        assignment = cluster_pipeline(counts, length, model.m, iterations=iterations, seed=seed)
        block = bmc_kernel(counts, assignment, allow_zero_rows=True)
        return estimation_risk(truth, empirical_kernel(counts)), estimation_risk(truth, block)

    risks = ordered_map(run, tasks, threads=threads, progress=progress, description="risk curve")

    rows = []
    for c, length in enumerate(lengths):
        cell = np.array(risks[c * len(seeds) : (c + 1) * len(seeds)])
        r_emp, emp_err = summarize(cell[:, 0])
        r_bmc, bmc_err = summarize(cell[:, 1])
        rows.append(
            {
                "length": int(length),
                "R_emp": r_emp,
                "R_bmc": r_bmc,
                "R_unif": r_unif,
                "R_emp_stderr": emp_err,
                "R_bmc_stderr": bmc_err,
                "seeds": len(seeds),
            }
        )
        logger.info(f"Risk cell length={length}: empirical {r_emp:.4f}, block {r_bmc:.4f}, uniform {r_unif:.4f}")
    return pd.DataFrame(rows, columns=RISK_COLUMNS)


def order_error_experiment(
    path: SamplePath,
    assignment: ClusterAssignment,
    perturb: PerturbationSpec,
    epsilons: Sequence[float],
    repetitions: Optional[int] = None,
    length: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Over- and underfit frequencies of CAIC order selection between orders 0 and 1.

    Order-0 and order-1 base kernels are fitted on the full state space of
    ``path``. The order-1 base is mixed with a zero-order heavy-tailed kernel
    (data-generating model with true order 1) and the order-0 base with an
    ordinary heavy-tailed kernel (true order 0). Each sampled path is mapped
    to clusters and the order is selected over {0, 1}.

    Args:
        path: Observed path the base models are fitted on
        assignment: State clusters
        perturb: Perturbation family; its seed is replaced per repetition
        epsilons: Perturbation strengths
        repetitions: Paths per model and epsilon
        length: Simulated path length (default: length of ``path``)
        seed: Integer seed
        threads: Worker cap
        progress: Show a progress bar

    Returns:
        DataFrame with columns ``epsilon, e_over, e_under, repetitions``
    """
    repetitions = repetitions or settings.repetitions
    length = length or len(path)
    order_one, order_zero = fit_order_base_models(path)
    n = path.n
    start = int(path.symbols[0])
    tasks = [(c, float(eps), rep) for c, eps in enumerate(epsilons) for rep in range(repetitions)]

    def selected(base: StateKernel, delta: StateKernel, eps: float, run_seed: int) -> int:
        simulated = sample_mixture(base, delta, eps, length, seed=run_seed, start=start)
        order, _ = select_order(cluster_path(simulated, assignment.labels, assignment.m), r_max=1)
        return order

    def run(task):
        cell, eps, rep = task
        spec = perturb.with_seed(derive_seed(seed, cell, rep, 0))
        under = selected(order_one, make_zero_order_perturbation(spec, n), eps, derive_seed(seed, cell, rep, 1)) == 0
        over = selected(order_zero, make_perturbation(spec, n), eps, derive_seed(seed, cell, rep, 2)) == 1
        return over, under

    outcomes = ordered_map(run, tasks, threads=threads, progress=progress, description="order error")

    rows = []
    for c, eps in enumerate(epsilons):
        cell = np.array(outcomes[c * repetitions : (c + 1) * repetitions], dtype=float)
        rows.append(
            {
                "epsilon": float(eps),
                "e_over": float(cell[:, 0].mean()),
                "e_under": float(cell[:, 1].mean()),
                "repetitions": repetitions,
            }
        )
        logger.info(f"Order-error cell epsilon={eps}: e_over={rows[-1]['e_over']:.3f}, e_under={rows[-1]['e_under']:.3f}")
    return pd.DataFrame(rows, columns=ORDER_ERROR_COLUMNS)
