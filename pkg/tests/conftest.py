"""Pytest configuration and shared fixtures."""

import os

import numpy as np
import pytest

from src.core.models import ClusterModel, balanced_sigma


@pytest.fixture(scope="session", autouse=True)
def setup_test_env():
    """Setup test environment variables."""
    os.environ["BMCKIT_LOG_LEVEL"] = "ERROR"  # Reduce noise in tests
    os.environ["BMCKIT_THREADS"] = "1"


THREE_CLUSTER_P = np.array(
    [
        [0.9, 0.1, 0.0],
        [0.0, 0.1, 0.9],
        [0.3, 0.7, 0.0],
    ]
)
THREE_CLUSTER_PI = np.array([27.0 / 46.0, 10.0 / 46.0, 9.0 / 46.0])


@pytest.fixture
def three_cluster_p():
    """Three-cluster transition matrix used across the test suite."""
    return THREE_CLUSTER_P.copy()


@pytest.fixture
def three_cluster_pi():
    """Exact equilibrium of the three-cluster matrix."""
    return THREE_CLUSTER_PI.copy()


@pytest.fixture
def three_cluster_model():
    """Factory for balanced three-cluster models over n states."""

    def build(n: int = 6) -> ClusterModel:
        return ClusterModel(m=3, sigma=balanced_sigma(n, 3), p=THREE_CLUSTER_P)

    return build
