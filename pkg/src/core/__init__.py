"""Model parameterizations, validation and equilibria."""

from src.core.equilibrium import (
    cluster_equilibrium,
    is_ergodic,
    is_irreducible,
    period,
    state_equilibrium,
    stationary_distribution,
)
from src.core.errors import (
    BmcError,
    DegenerateCell,
    DimensionMismatch,
    EmptyAfterFilter,
    InvalidModel,
    InvalidZ,
    MissingRow,
    NoConvergence,
    NonErgodic,
    PathTooShort,
    SupportMismatch,
    VocabularyMismatch,
    ZeroMassCluster,
    ZeroProbabilityTransition,
)
from src.core.kernels import (
    RelabelKey,
    cluster_path,
    model_difference,
    relabel_clusters,
    state_kernel_of,
)
from src.core.models import (
    ClusterModel,
    Distribution,
    SamplePath,
    StateKernel,
    balanced_sigma,
    sigma_from_sizes,
)
from src.core.parallel import ordered_map

__all__ = [
    "BmcError",
    "ClusterModel",
    "DegenerateCell",
    "DimensionMismatch",
    "Distribution",
    "EmptyAfterFilter",
    "InvalidModel",
    "InvalidZ",
    "MissingRow",
    "NoConvergence",
    "NonErgodic",
    "PathTooShort",
    "RelabelKey",
    "SamplePath",
    "StateKernel",
    "SupportMismatch",
    "VocabularyMismatch",
    "ZeroMassCluster",
    "ZeroProbabilityTransition",
    "balanced_sigma",
    "cluster_equilibrium",
    "cluster_path",
    "is_ergodic",
    "is_irreducible",
    "model_difference",
    "ordered_map",
    "period",
    "relabel_clusters",
    "sigma_from_sizes",
    "state_equilibrium",
    "state_kernel_of",
    "stationary_distribution",
]
