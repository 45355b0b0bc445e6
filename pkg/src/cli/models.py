"""File schemas for JSON inputs and outputs of the command line."""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class ClusterModelFile(BaseModel):
    """Cluster model ``{"m", "sigma", "p"}``; sigma may be omitted."""

    m: int = Field(..., ge=1)
    sigma: Optional[List[int]] = None
    p: List[List[float]]


class AssignmentFile(BaseModel):
    """Cluster labels of every state."""

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    labels: List[int]


class ParamsFile(BaseModel):
    """Estimated cluster fractions, equilibrium and transition matrix."""

    alpha: List[float]
    pi_hat: List[float]
    p_hat: List[List[float]]


class ClusterSummaryFile(BaseModel):
    """Diagnostics of one clustering run."""

    n: int
    m: int
    path_length: int
    trimmed: int
    rank_deficient: bool
    empty_clusters: bool
    misclassification: Optional[float] = None


class KlReportFile(BaseModel):
    """Divergence-rate comparison of two candidate models."""

    d_hat: float
    ci_halfwidth: float = Field(..., ge=0)
    z: float = Field(..., gt=0, lt=1)
    delta: float = Field(..., ge=0)
    tau_mix: float = Field(..., ge=0)
    length: int
    decision: Literal["P better", "Q better", "inconclusive"]
    candidate_p: str
    candidate_q: str


class OrderSelectionFile(BaseModel):
    """Chosen order and the criterion it minimized."""

    order: int = Field(..., ge=0)
    r_max: int = Field(..., ge=0)
    penalty: Literal["caic", "aic"]
    alphabet: int


class DensityComparisonFile(BaseModel):
    """Kolmogorov distance between the empirical and the limiting density."""

    kind: Literal["laplacian", "frequency"]
    kolmogorov: float = Field(..., ge=0, le=1)
    lam: float = Field(..., gt=0)
    out_of_regime: bool
    drop_leading: int = Field(..., ge=0)
    eta: float = Field(..., gt=0)
    pieces: int = Field(..., ge=1)


class RunConfig(BaseModel):
    """Resolved options of one command, echoed next to its outputs."""

    model_config = ConfigDict(extra="allow")

    subcommand: str
    seed: int = 0
    out: str
