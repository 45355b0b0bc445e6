"""Configuration management for bmckit."""

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix ``BMCKIT_``)."""

    # Runtime
    log_level: str = "INFO"
    threads: int = Field(default=1, ge=1)

    # Probability validation
    probability_tolerance: float = 1e-12
    renormalize_tolerance: float = 1e-9

    # Equilibrium solver
    equilibrium_tolerance: float = 1e-12
    equilibrium_max_iterations: int = 1_000_000
    stationarity_residual: float = 1e-10

    # Clustering
    kmeans_restarts: int = 10
    kmeans_max_iterations: int = 300
    kmeans_tolerance: float = 1e-8  # center shift relative to the embedding variance
    improvement_iterations: int = 10
    max_empty_restarts: int = 5

    # Model selection
    tau_mix: float = 20.0
    z: float = 0.05
    r_max: int = 4
    smoothing: float = 0.5
    repetitions: int = 30

    # Spectra
    bins: int = 60
    eta: float = 1e-3
    damping: float = 0.5
    fixed_point_tolerance: float = 1e-12
    fixed_point_max_iterations: int = 100_000
    regime_threshold: float = 0.1

    # Ingest
    drop_top: int = 100
    min_count: int = 1000

    # Simulation
    zipf_support: int = 1_000_000

    class Config:
        env_file = ".env"
        env_prefix = "BMCKIT_"
        case_sensitive = False
        extra = "ignore"


# Global settings instance
settings = Settings()
