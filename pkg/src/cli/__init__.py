"""Command-line surface and its file schemas."""

from src.cli.models import (
    AssignmentFile,
    ClusterModelFile,
    ClusterSummaryFile,
    DensityComparisonFile,
    KlReportFile,
    OrderSelectionFile,
    ParamsFile,
    RunConfig,
)

__all__ = [
    "AssignmentFile",
    "ClusterModelFile",
    "ClusterSummaryFile",
    "DensityComparisonFile",
    "KlReportFile",
    "OrderSelectionFile",
    "ParamsFile",
    "RunConfig",
]
