"""Command-line entry point for bmckit."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.cli.commands import UsageError, run
from src.cli.models import RunConfig
from src.config import settings
from src.core.errors import BmcError
from src.data.loader import load_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Built-in defaults per subcommand; flags and --config values override them
DEFAULTS: Dict[str, Dict[str, Any]] = {}


def _option(sub: argparse.ArgumentParser, flag: str, default: Any = None, dest: Optional[str] = None, **kwargs) -> None:
    dest = dest or flag.lstrip("-").replace("-", "_")
    DEFAULTS[sub.prog.split()[-1]][dest] = default
    sub.add_argument(flag, dest=dest, default=None, **kwargs)


def _subcommand(subparsers, name: str, help_text: str) -> argparse.ArgumentParser:
    sub = subparsers.add_parser(name, help=help_text)
    DEFAULTS[name] = {}
    sub.add_argument("--config", default=None, help="JSON file with option values")
    _option(sub, "--seed", 0, type=int, help="Integer seed for all randomness")
    _option(sub, "--out", None, help="Output directory")
    return sub


def _observation_options(sub: argparse.ArgumentParser, counts: bool = True) -> None:
    _option(sub, "--path", help="Sample path CSV")
    if counts:
        _option(sub, "--counts", help="Count matrix CSV (i,j,count)")
    _option(sub, "--remove-self-jumps", False, action="store_true", help="Collapse repeated symbols")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(prog="bmckit", description="Block Markov chain toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = _subcommand(subparsers, "simulate", "Sample a path from a cluster model")
    _option(sub, "--model", help="Cluster model JSON")
    _option(sub, "--n", type=int, help="Number of states when the model has no sigma")
    _option(sub, "--length", "auto", help="Path length or 'auto' for floor(30 n ln n)")
    _option(sub, "--generator", "bmc", choices=["bmc", "bmc0", "dcbmc"])
    _option(sub, "--perturb", "kind=heavy_tailed,s=1.5", help="Perturbation kernel, e.g. kind=heavy_tailed,s=1.5")
    _option(sub, "--epsilon", 0.0, type=float, help="Perturbation strength")

    sub = _subcommand(subparsers, "cluster", "Cluster states of an observed path")
    _observation_options(sub)
    _option(sub, "--m", type=int, help="Number of clusters")
    _option(sub, "--gamma", 0, type=int, help="Number of highest-degree states to trim")
    _option(sub, "--iterations", settings.improvement_iterations, type=int, help="Improvement passes")
    _option(sub, "--truth", help="Ground-truth assignment JSON for the misclassification ratio")

    sub = _subcommand(subparsers, "evaluate-kl", "Compare two candidate models on a holdout half")
    _observation_options(sub, counts=False)
    _option(sub, "--assignment", help="Assignment JSON for block candidates")
    _option(sub, "--m", type=int, help="Cluster the training half into m clusters")
    _option(sub, "--candidate-p", "bmc", choices=["bmc", "bmc0", "empirical", "uniform"])
    _option(sub, "--candidate-q", "bmc0", choices=["bmc", "bmc0", "empirical", "uniform"])
    _option(sub, "--smoothing", 0.0, type=float, help="Additive count smoothing")
    _option(sub, "--tau-mix", settings.tau_mix, type=float, help="Assumed mixing time")
    _option(sub, "--z", settings.z, type=float, help="Confidence level input (0.05 for 95%%)")
    _option(sub, "--curve-points", 0, type=int, help="Write the estimate over this many prefixes")

    sub = _subcommand(subparsers, "select-order", "Select the Markov order by CAIC")
    _observation_options(sub, counts=False)
    _option(sub, "--assignment", help="Map states to clusters first")
    _option(sub, "--r-max", settings.r_max, type=int, help="Largest order tried")
    _option(sub, "--penalty", "caic", choices=["caic", "aic"])

    sub = _subcommand(subparsers, "spectra", "Singular-value histogram against the limiting density")
    _observation_options(sub)
    _option(sub, "--model", help="Cluster model JSON for the limiting density")
    _option(sub, "--assignment", help="Fit the limiting-density model from this assignment")
    _option(sub, "--kind", "laplacian", choices=["laplacian", "frequency"])
    _option(sub, "--drop-leading", type=int, help="Leading singular values to drop (default m)")
    _option(sub, "--bins", settings.bins, type=int)
    _option(sub, "--pieces", 1, type=int, help="Average histograms over this many path pieces")
    _option(sub, "--lambda", dest="lam", type=float, help="Override lambda = l / n^2")
    _option(sub, "--eta", settings.eta, type=float, help="Imaginary offset of the solver")
    _option(sub, "--grid-points", 400, type=int)

    sub = _subcommand(subparsers, "ingest", "Convert raw observations into a path")
    _option(sub, "--format", choices=["tokens", "codons", "gps", "prices", "corpus"])
    _option(sub, "--input", help="Raw input file")
    _option(sub, "--min-count", type=int, help="Minimum token count")
    _option(sub, "--drop-top", type=int, help="Number of most frequent tokens to drop")
    _option(sub, "--cell-km", 1.0, type=float, help="Grid cell size in km")
    _option(sub, "--bbox", help="lat_min,lat_max,lon_min,lon_max (open box)")
    _option(sub, "--cosine", "listing", choices=["listing", "cell", "record"])
    _option(sub, "--sort-by-timestamp", False, action="store_true")
    _option(sub, "--remove-self-jumps", False, action="store_true")
    _option(sub, "--assignment", help="Assignment JSON for corpus vectors")
    _option(sub, "--vocab", help="Vocabulary file for corpus vectors")

    sub = _subcommand(subparsers, "experiment", "Run a Monte-Carlo experiment")
    _option(sub, "--kind", choices=["robustness", "risk_curve", "order_error"])
    _option(sub, "--model", help="Cluster model JSON (default: two-cluster robustness model)")
    _option(sub, "--n", type=int)
    _option(sub, "--perturb", "kind=heavy_tailed,s=1.5")
    _option(sub, "--epsilons", "0,0.05,0.1,0.2,0.3", help="Comma-separated perturbation strengths")
    _option(sub, "--epsilon", 0.05, type=float, help="Perturbation strength of the risk curve")
    _option(sub, "--seeds", 10, type=int, help="Number of seeds per cell")
    _option(sub, "--length", type=int)
    _option(sub, "--lengths", help="Comma-separated path lengths of the risk curve")
    _option(sub, "--iterations", settings.improvement_iterations, type=int)
    _option(sub, "--gamma", 0, type=int)
    _option(sub, "--path", help="Observed path for the order-error experiment")
    _option(sub, "--assignment", help="Assignment JSON for the order-error experiment")
    _option(sub, "--repetitions", settings.repetitions, type=int)
    _option(sub, "--progress", False, action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the optional JSON config file and explicit flags, in that order.

    Raises:
        UsageError: On unknown config keys or a missing output directory
    """
    defaults = DEFAULTS[args.command]
    from_file: Dict[str, Any] = {}
    if args.config is not None:
        from_file = load_json(Path(args.config))
        # an echoed config.json names its subcommand
        if from_file.pop("subcommand", args.command) != args.command:
            raise UsageError(f"{args.config} was written by another subcommand")
        unknown = sorted(set(from_file) - set(defaults))
        if unknown:
            raise UsageError(f"Unknown keys in {args.config}: {', '.join(unknown)}")
    flags = {key: value for key, value in vars(args).items() if key in defaults and value is not None}
    resolved = {**defaults, **from_file, **flags}
    if resolved["out"] is None:
        raise UsageError(f"{args.command} requires --out")
    return RunConfig(subcommand=args.command, **resolved)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        config = resolve_config(args)
        logger.info(f"Running {config.subcommand} with seed {config.seed}")
        run(config)
    except (UsageError, FileNotFoundError) as e:
        print(f"bmckit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (BmcError, ValidationError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"bmckit {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK
