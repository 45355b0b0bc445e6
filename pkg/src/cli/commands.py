"""Command implementations: each reads inputs, runs the library and writes validated outputs."""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Type

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.cli.models import (
    AssignmentFile,
    ClusterSummaryFile,
    DensityComparisonFile,
    KlReportFile,
    OrderSelectionFile,
    ParamsFile,
    RunConfig,
)
from src.cluster.evaluation import misclassification_ratio
from src.cluster.experiments import default_robustness_model, robustness_experiment
from src.cluster.improve import cluster_pipeline, estimate_params, fit_bmc_model
from src.cluster.models import ClusterAssignment
from src.core.equilibrium import cluster_equilibrium
from src.core.kernels import cluster_path
from src.core.models import ClusterModel, Distribution, SamplePath, StateKernel
from src.counts.frequency import CountMatrix, frequency_matrix, remove_self_jumps, trim
from src.data.loader import (
    load_assignment,
    load_corpus,
    load_counts,
    load_gps,
    load_json,
    load_model,
    load_path,
    load_prices,
    load_text,
    load_tokens,
    save_counts,
    save_frame,
    save_json,
    save_path,
)
from src.ingest.documents import cfidf_vectors, return_maximizers
from src.ingest.gps import BoundingBox, gps_to_states
from src.ingest.tokens import codons, tokenize
from src.modelsel.estimators import bmc0_kernel, bmc_kernel, empirical_kernel, uniform_kernel
from src.modelsel.experiments import order_error_experiment, risk_curve_experiment
from src.modelsel.likelihood import holdout_split, kl_rate_curve, kl_report
from src.modelsel.order import get_penalty, select_order
from src.simulate.perturbations import make_perturbation, parse_perturbation
from src.simulate.rng import derive_seed
from src.simulate.samplers import (
    default_length,
    dcbmc_kernel,
    exponential_weights,
    sample_bmc,
    sample_bmc0,
    sample_dcbmc,
    sample_mixture,
    sample_perturbed_bmc,
)
from src.spectra.density import compare_density, limiting_density
from src.spectra.empirical import (
    piece_histograms,
    regime_lambda,
    scaled_matrix,
    singular_values,
    sv_histogram,
)
from src.spectra.profiles import frequency_profile, laplacian_profile

logger = logging.getLogger(__name__)


class UsageError(Exception):
    """A required option is missing or options contradict each other."""


def _out(config: RunConfig, name: str) -> Path:
    return Path(config.out) / name


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name, None) is None]
    if missing:
        flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        raise UsageError(f"{config.subcommand} requires {flags}")


def _floats(value) -> List[float]:
    if isinstance(value, str):
        return [float(item) for item in value.split(",") if item.strip()]
    return [float(item) for item in value]


def _ints(value) -> List[int]:
    return [int(item) for item in _floats(value)]


def write_validated(data: Dict, path: Path, schema: Type[BaseModel]) -> None:
    """Validate, write, then re-read and validate a JSON output."""
    schema.model_validate(data)
    save_json(data, path)
    schema.model_validate(load_json(path))


def _load_observations(config: RunConfig) -> tuple:
    """Counts and path length from ``--path`` or ``--counts``; the path itself when given."""
    if config.path is not None:
        path = load_path(Path(config.path))
        if config.remove_self_jumps:
            path = remove_self_jumps(path)
        return path, frequency_matrix(path), len(path)
    if config.counts is not None:
        counts = load_counts(Path(config.counts))
        return None, counts, counts.total + 1
    raise UsageError(f"{config.subcommand} requires --path or --counts")


def cmd_simulate(config: RunConfig) -> None:
    """Sample a path from a cluster model file."""
    _require(config, "model")
    model = load_model(Path(config.model), n=config.n)
    n = model.n
    length = default_length(n) if str(config.length) == "auto" else int(config.length)
    epsilon = float(config.epsilon)
    delta: Optional[StateKernel] = None
    if epsilon > 0:
        spec = parse_perturbation(config.perturb).with_seed(derive_seed(config.seed, 2))
        delta = make_perturbation(spec, n)

    if config.generator == "bmc":
        if delta is None:
            path = sample_bmc(model, length, seed=config.seed)
        else:
            path = sample_perturbed_bmc(model, delta, epsilon, length, seed=config.seed)
    elif config.generator == "bmc0":
        eta = cluster_equilibrium(model.p).values
        if delta is None:
            # sample_bmc0 lays clusters out contiguously
            contiguous = sample_bmc0(Distribution(eta), model.sizes, length, seed=config.seed)
            states = np.argsort(model.sigma, kind="stable")[contiguous.symbols]
            path = SamplePath(n=n, symbols=states)
        else:
            base = StateKernel(np.tile(eta[model.sigma] / model.sizes[model.sigma], (n, 1)))
            path = sample_mixture(base, delta, epsilon, length, seed=config.seed)
    elif config.generator == "dcbmc":
        mu = exponential_weights(model.sizes, seed=derive_seed(config.seed, 1))
        if delta is None:
            path = sample_dcbmc(model.p, mu, length, seed=config.seed, sigma=model.sigma)
        else:
            path = sample_mixture(dcbmc_kernel(model.p, mu, model.sigma), delta, epsilon, length, seed=config.seed)
    else:
        raise UsageError(f"Unknown generator: {config.generator}. Use 'bmc', 'bmc0' or 'dcbmc'.")

    save_path(path, _out(config, "path.csv"))
    logger.info(f"Wrote path of length {len(path)} over n={n} states")


def cmd_cluster(config: RunConfig) -> None:
    """Cluster the states of an observed path or count matrix."""
    _require(config, "m")
    _, counts, path_length = _load_observations(config)
    trimmed = trim(counts, int(config.gamma))
    assignment = cluster_pipeline(
        trimmed, path_length, int(config.m), iterations=int(config.iterations), seed=config.seed
    )
    write_validated(assignment.to_dict(), _out(config, "assignment.json"), AssignmentFile)
    params = estimate_params(counts, path_length, assignment)
    write_validated(params.to_dict(), _out(config, "params.json"), ParamsFile)

    misclassification = None
    if config.truth is not None:
        truth = load_assignment(Path(config.truth))
        misclassification = misclassification_ratio(truth, assignment)
        logger.info(f"Misclassification ratio against the given truth: {misclassification:.4f}")
    summary = ClusterSummaryFile(
        n=counts.n,
        m=assignment.m,
        path_length=path_length,
        trimmed=len(trimmed.trimmed),
        rank_deficient=assignment.rank_deficient,
        empty_clusters=assignment.empty_clusters,
        misclassification=misclassification,
    )
    write_validated(summary.model_dump(), _out(config, "summary.json"), ClusterSummaryFile)


def _candidate(name: str, counts: CountMatrix, assignment: Optional[ClusterAssignment], smoothing: float):
    if name == "empirical":
        return empirical_kernel(counts, smoothing)
    if name == "uniform":
        return uniform_kernel(counts.n)
    if assignment is None:
        raise UsageError(f"Candidate '{name}' needs --assignment or --m")
    if name == "bmc":
        return bmc_kernel(counts, assignment, smoothing)
    if name == "bmc0":
        return bmc0_kernel(counts, assignment, smoothing)
    raise UsageError(f"Unknown candidate: {name}. Use 'bmc', 'bmc0', 'empirical' or 'uniform'.")


def cmd_evaluate_kl(config: RunConfig) -> None:
    """Fit two candidates on the first half of a path and compare them on the second."""
    _require(config, "path")
    path = load_path(Path(config.path))
    if config.remove_self_jumps:
        path = remove_self_jumps(path)
    train, validation = holdout_split(path)
    counts = frequency_matrix(train)
    assignment = None
    if config.assignment is not None:
        assignment = load_assignment(Path(config.assignment))
    elif config.m is not None:
        assignment = cluster_pipeline(counts, len(train), int(config.m), seed=config.seed)

    smoothing = float(config.smoothing)
    P = _candidate(config.candidate_p, counts, assignment, smoothing)
    Q = _candidate(config.candidate_q, counts, assignment, smoothing)
    report = kl_report(validation, P, Q, tau_mix=float(config.tau_mix), z=float(config.z))
    data = {**report.to_dict(), "candidate_p": config.candidate_p, "candidate_q": config.candidate_q}
    write_validated(data, _out(config, "kl_report.json"), KlReportFile)

    if int(config.curve_points) > 0:
        horizons = np.unique(np.linspace(2, len(validation), int(config.curve_points)).astype(int))
        save_frame(kl_rate_curve(validation, P, Q, horizons), _out(config, "kl_curve.csv"))
    print(f"{config.candidate_p} vs {config.candidate_q}: {report.describe()}")


def cmd_select_order(config: RunConfig) -> None:
    """Select the order of a (cluster) path by the information criterion."""
    _require(config, "path")
    path = load_path(Path(config.path))
    if config.remove_self_jumps:
        path = remove_self_jumps(path)
    if config.assignment is not None:
        assignment = load_assignment(Path(config.assignment))
        path = cluster_path(path, assignment.labels, assignment.m)
    order, table = select_order(path, r_max=int(config.r_max), penalty=get_penalty(config.penalty))
    frame = pd.DataFrame({"r": list(table), "criterion": list(table.values())})
    save_frame(frame, _out(config, "order_table.csv"))
    selection = {"order": order, "r_max": int(config.r_max), "penalty": config.penalty, "alphabet": path.n}
    write_validated(selection, _out(config, "order.json"), OrderSelectionFile)
    print(f"selected order: {order}")


def _theory_model(config: RunConfig, counts: CountMatrix, path_length: int) -> ClusterModel:
    if config.model is not None:
        return load_model(Path(config.model), n=counts.n)
    if config.assignment is not None:
        return fit_bmc_model(counts, path_length, load_assignment(Path(config.assignment)))
    return ClusterModel(m=1, sigma=np.zeros(counts.n, dtype=np.int64), p=np.array([[1.0]]))


def cmd_spectra(config: RunConfig) -> None:
    """Empirical singular-value histogram against the limiting density."""
    path, counts, path_length = _load_observations(config)
    model = _theory_model(config, counts, path_length)
    drop = model.m if config.drop_leading is None else int(config.drop_leading)
    pieces = int(config.pieces)
    if pieces > 1:
        if path is None:
            raise UsageError("--pieces needs --path")
        histogram = piece_histograms(path, config.kind, pieces=pieces, bins=int(config.bins), drop_leading=drop)
        piece_length = path_length // pieces
    else:
        values = singular_values(scaled_matrix(counts, config.kind))
        histogram = sv_histogram(values, bins=int(config.bins), drop_leading=drop)
        piece_length = path_length

    lam, out_of_regime = regime_lambda(piece_length, counts.n)
    if config.lam is not None:
        lam = float(config.lam)
    build = laplacian_profile if config.kind == "laplacian" else frequency_profile
    profile = build(model, lam)
    upper = 1.2 * float(histogram.edges[-1])
    grid = np.linspace(0.0, upper, int(config.grid_points))
    theory = limiting_density(profile, grid, eta=float(config.eta))

    save_frame(histogram.to_frame(), _out(config, "histogram.csv"))
    save_frame(theory.to_frame(), _out(config, "theory.csv"))
    comparison = {
        "kind": config.kind,
        "kolmogorov": compare_density(histogram, theory),
        "lam": lam,
        "out_of_regime": out_of_regime,
        "drop_leading": drop,
        "eta": float(config.eta),
        "pieces": pieces,
    }
    write_validated(comparison, _out(config, "comparison.json"), DensityComparisonFile)
    logger.info(f"Kolmogorov distance {comparison['kolmogorov']:.4f} at lambda={lam:.4g}")


def _bbox(value) -> Optional[BoundingBox]:
    if value is None:
        return None
    bounds = _floats(value)
    if len(bounds) != 4:
        raise UsageError("--bbox takes lat_min,lat_max,lon_min,lon_max")
    return BoundingBox(*bounds)


def cmd_ingest(config: RunConfig) -> None:
    """Convert a raw observation file into a path (and side outputs)."""
    _require(config, "input", "format")
    source = Path(config.input)
    fmt = config.format
    if fmt == "tokens":
        path = tokenize(load_tokens(source), min_count=config.min_count, drop_top=config.drop_top)
    elif fmt == "codons":
        min_count = 1 if config.min_count is None else config.min_count
        drop_top = 0 if config.drop_top is None else config.drop_top
        path = tokenize(codons(load_text(source)), min_count=min_count, drop_top=drop_top)
    elif fmt == "gps":
        path, registry = gps_to_states(
            load_gps(source),
            float(config.cell_km),
            bbox=_bbox(config.bbox),
            cosine=config.cosine,
            sort_by_timestamp=bool(config.sort_by_timestamp),
        )
        save_json(registry.to_dict(), _out(config, "registry.json"))
    elif fmt == "prices":
        opens, closes = load_prices(source)
        path = return_maximizers(opens, closes, seed=config.seed)
    elif fmt == "corpus":
        _require(config, "assignment", "vocab")
        assignment = load_assignment(Path(config.assignment))
        vectors = cfidf_vectors(load_corpus(source), assignment, load_tokens(Path(config.vocab)))
        frame = pd.DataFrame(vectors, columns=[f"c{k}" for k in range(assignment.m)])
        save_frame(frame, _out(config, "cfidf.csv"))
        return
    else:
        raise UsageError(f"Unknown format: {fmt}. Use 'tokens', 'codons', 'gps', 'prices' or 'corpus'.")

    if config.remove_self_jumps:
        path = remove_self_jumps(path)
    save_path(path, _out(config, "path.csv"))
    if len(path) > 1:
        save_counts(frequency_matrix(path), _out(config, "counts.csv"))
    logger.info(f"Ingested {fmt} input into a path of length {len(path)} over {path.n} symbols")


def cmd_experiment(config: RunConfig) -> None:
    """Run one of the Monte-Carlo experiment drivers and write its table."""
    _require(config, "kind")
    seeds = [derive_seed(config.seed, k) for k in range(int(config.seeds))]
    kind = config.kind
    if kind == "robustness":
        model = _experiment_model(config)
        table = robustness_experiment(
            model,
            parse_perturbation(config.perturb),
            _floats(config.epsilons),
            seeds,
            length=None if config.length is None else int(config.length),
            iterations=int(config.iterations),
            gamma=int(config.gamma),
            progress=bool(config.progress),
        )
    elif kind == "risk_curve":
        _require(config, "lengths")
        model = _experiment_model(config)
        spec = parse_perturbation(config.perturb).with_seed(derive_seed(config.seed, 2))
        table = risk_curve_experiment(
            model,
            make_perturbation(spec, model.n),
            float(config.epsilon),
            _ints(config.lengths),
            seeds,
            iterations=int(config.iterations),
            progress=bool(config.progress),
        )
    elif kind == "order_error":
        _require(config, "path", "assignment")
        table = order_error_experiment(
            load_path(Path(config.path)),
            load_assignment(Path(config.assignment)),
            parse_perturbation(config.perturb),
            _floats(config.epsilons),
            repetitions=int(config.repetitions),
            length=None if config.length is None else int(config.length),
            seed=config.seed,
            progress=bool(config.progress),
        )
    else:
        raise UsageError(f"Unknown experiment: {kind}. Use 'robustness', 'risk_curve' or 'order_error'.")
    save_frame(table, _out(config, f"{kind}.csv"))


def _experiment_model(config: RunConfig) -> ClusterModel:
    if config.model is not None:
        return load_model(Path(config.model), n=config.n)
    _require(config, "n")
    return default_robustness_model(int(config.n))


COMMANDS: Dict[str, Callable[[RunConfig], None]] = {
    "simulate": cmd_simulate,
    "cluster": cmd_cluster,
    "evaluate-kl": cmd_evaluate_kl,
    "select-order": cmd_select_order,
    "spectra": cmd_spectra,
    "ingest": cmd_ingest,
    "experiment": cmd_experiment,
}


def run(config: RunConfig) -> None:
    """Echo the resolved config and run the command."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_validated(config.model_dump(), out / "config.json", RunConfig)
    COMMANDS[config.subcommand](config)

