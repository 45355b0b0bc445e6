"""Unit tests for core models and equilibria."""

import numpy as np
import pytest
import scipy.sparse as sp

from src.core.equilibrium import (
    cluster_equilibrium,
    is_ergodic,
    period,
    state_equilibrium,
    stationary_distribution,
)
from src.core.errors import InvalidModel, NonErgodic
from src.core.kernels import cluster_path, model_difference, relabel_clusters, state_kernel_of
from src.core.models import (
    ClusterModel,
    Distribution,
    SamplePath,
    StateKernel,
    balanced_sigma,
    sigma_from_sizes,
)


def random_model(rng: np.random.Generator, n: int, m: int) -> ClusterModel:
    sigma = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    rng.shuffle(sigma)
    p = rng.random((m, m)) + 0.05
    p /= p.sum(axis=1, keepdims=True)
    return ClusterModel(m=m, sigma=sigma, p=p)


class TestClusterModel:
    """Test cluster model construction."""

    def test_valid_model(self, three_cluster_model):
        """Test sizes and n for a balanced model."""
        model = three_cluster_model(6)
        assert model.n == 6
        assert list(model.sizes) == [2, 2, 2]

    def test_empty_cluster_rejected(self):
        """Test that a cluster without states is rejected."""
        with pytest.raises(InvalidModel):
            ClusterModel(m=2, sigma=np.array([0, 0]), p=np.eye(2))

    def test_label_out_of_range(self):
        """Test that sigma must stay below m."""
        with pytest.raises(InvalidModel):
            ClusterModel(m=1, sigma=np.array([0, 1]), p=np.ones((1, 1)))

    def test_renormalizes_small_deviation(self):
        """Test that round-off below the ceiling is repaired."""
        p = np.array([[0.5, 0.5 + 5e-10], [0.5, 0.5]])
        model = ClusterModel(m=2, sigma=np.array([0, 1]), p=p)
        assert model.p.sum(axis=1) == pytest.approx([1.0, 1.0], abs=1e-15)

    def test_rejects_broken_rows(self):
        """Test that rows far from stochastic are rejected."""
        with pytest.raises(InvalidModel):
            ClusterModel(m=2, sigma=np.array([0, 1]), p=np.array([[0.5, 0.6], [0.5, 0.5]]))

    def test_dict_layout(self, three_cluster_model):
        """Test the JSON field layout."""
        data = three_cluster_model(3).to_dict()
        assert set(data) == {"m", "sigma", "p"}
        assert data["sigma"] == [0, 1, 2]
        assert ClusterModel.from_dict(data).p[0, 0] == 0.9

    def test_immutable_arrays(self, three_cluster_model):
        """Test that arrays cannot be written after construction."""
        model = three_cluster_model(6)
        with pytest.raises(ValueError):
            model.p[0, 0] = 0.5


class TestSmallTypes:
    """Test distributions, kernels and paths."""

    def test_distribution_sum(self):
        """Test distribution validation."""
        assert len(Distribution([0.25, 0.75])) == 2
        with pytest.raises(InvalidModel):
            Distribution([0.5, 0.6])
        with pytest.raises(InvalidModel):
            Distribution([-0.1, 1.1])

    def test_sparse_kernel(self):
        """Test that sparse kernels are accepted."""
        kernel = StateKernel(sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert kernel.is_sparse
        assert kernel.n == 2
        np.testing.assert_array_equal(kernel.toarray(), [[0, 1], [1, 0]])

    def test_path_bounds(self):
        """Test that path ids must be below n."""
        with pytest.raises(InvalidModel):
            SamplePath(n=2, symbols=np.array([0, 2]))
        with pytest.raises(InvalidModel):
            SamplePath(n=2, symbols=np.array([], dtype=int))

    def test_path_decode(self):
        """Test decoding through the vocabulary."""
        path = SamplePath(n=2, symbols=np.array([1, 0, 1]), vocabulary=("a", "b"))
        assert path.decode() == ["b", "a", "b"]

    def test_sigma_helpers(self):
        """Test contiguous cluster maps."""
        assert list(balanced_sigma(6, 3)) == [0, 0, 1, 1, 2, 2]
        assert list(sigma_from_sizes([1, 3])) == [0, 1, 1, 1]


class TestStateKernel:
    """Test state_kernel_of."""

    def test_single_cluster(self):
        """Test that one cluster gives the uniform kernel."""
        model = ClusterModel(m=1, sigma=np.zeros(3, dtype=int), p=np.ones((1, 1)))
        np.testing.assert_allclose(state_kernel_of(model).P, np.full((3, 3), 1 / 3))

    def test_fig1_entry(self, three_cluster_model):
        """Test P_02 = 0.1 / 2."""
        kernel = state_kernel_of(three_cluster_model(6))
        assert kernel.P[0, 2] == pytest.approx(0.05)

    def test_alternation(self):
        """Test the block anti-diagonal kernel."""
        model = ClusterModel(m=2, sigma=np.array([0, 0, 1, 1]), p=np.array([[0, 1], [1, 0]]))
        expected = np.array(
            [[0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5], [0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0]]
        )
        np.testing.assert_allclose(state_kernel_of(model).P, expected)

    def test_rows_stochastic_random(self):
        """Test row sums over random models."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            m = int(rng.integers(1, 6))
            n = int(rng.integers(m, 51))
            P = state_kernel_of(random_model(rng, n, m)).P
            assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12


class TestEquilibrium:
    """Test equilibrium computations."""

    def test_symmetric(self):
        """Test the uniform two-state chain."""
        pi = cluster_equilibrium(np.full((2, 2), 0.5))
        np.testing.assert_allclose(pi.values, [0.5, 0.5])

    def test_fig1(self, three_cluster_p, three_cluster_pi):
        """Test the three-cluster equilibrium."""
        pi = cluster_equilibrium(three_cluster_p).values
        np.testing.assert_allclose(pi, three_cluster_pi, atol=1e-10)
        assert np.abs(pi @ three_cluster_p - pi).max() <= 1e-10

    def test_reducible(self):
        """Test that the identity chain is rejected."""
        with pytest.raises(NonErgodic):
            cluster_equilibrium(np.eye(2))

    def test_periodic(self):
        """Test that a deterministic cycle is rejected."""
        cycle = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert period(cycle) == 2
        assert not is_ergodic(cycle)
        with pytest.raises(NonErgodic):
            cluster_equilibrium(cycle)

    def test_period_three(self):
        """Test the period of a three-cycle."""
        assert period(np.roll(np.eye(3), 1, axis=1)) == 3

    def test_state_uniform(self):
        """Test one cluster over four states."""
        model = ClusterModel(m=1, sigma=np.zeros(4, dtype=int), p=np.ones((1, 1)))
        np.testing.assert_allclose(state_equilibrium(model).values, np.full(4, 0.25))

    def test_state_fig1(self, three_cluster_model, three_cluster_pi):
        """Test that equilibrium is split evenly inside clusters."""
        Pi = state_equilibrium(three_cluster_model(6)).values
        assert Pi[0] == pytest.approx(three_cluster_pi[0] / 2, abs=1e-10)
        assert Pi[0] == Pi[1]

    def test_size_one_cluster(self, three_cluster_p, three_cluster_pi):
        """Test that a singleton cluster carries its full mass."""
        model = ClusterModel(m=3, sigma=np.array([0, 1, 1, 2, 2, 2]), p=three_cluster_p)
        Pi = state_equilibrium(model).values
        assert Pi[0] == pytest.approx(three_cluster_pi[0], abs=1e-10)

    def test_matches_state_power_iteration(self):
        """Test agreement with the stationary vector of the state kernel."""
        rng = np.random.default_rng(7)
        for _ in range(20):
            model = random_model(rng, 20, 3)
            direct = stationary_distribution(state_kernel_of(model).P).values
            np.testing.assert_allclose(state_equilibrium(model).values, direct, atol=1e-8)

    def test_sparse_input(self, three_cluster_p, three_cluster_pi):
        """Test that sparse matrices work."""
        pi = stationary_distribution(sp.csr_matrix(three_cluster_p)).values
        np.testing.assert_allclose(pi, three_cluster_pi, atol=1e-10)


class TestRelabel:
    """Test relabel_clusters."""

    def test_sorted_is_identity(self, three_cluster_model):
        """Test that a sorted model is unchanged."""
        model = three_cluster_model(6)
        relabeled = relabel_clusters(model, "equilibrium")
        np.testing.assert_array_equal(relabeled.sigma, model.sigma)
        np.testing.assert_array_equal(relabeled.p, model.p)

    def test_size_swap(self):
        """Test swapping labels by cluster size."""
        p = np.array([[0.2, 0.8], [0.4, 0.6]])
        model = ClusterModel(m=2, sigma=np.array([0, 1, 1, 1]), p=p)
        relabeled = relabel_clusters(model, "size")
        assert list(relabeled.sigma) == [1, 0, 0, 0]
        np.testing.assert_array_equal(relabeled.p, [[0.6, 0.4], [0.8, 0.2]])
        np.testing.assert_allclose(state_kernel_of(relabeled).P, state_kernel_of(model).P)

    def test_idempotent(self):
        """Test that relabeling twice equals relabeling once."""
        rng = np.random.default_rng(3)
        for _ in range(10):
            model = random_model(rng, 12, 4)
            once = relabel_clusters(model, "size")
            twice = relabel_clusters(once, "size")
            np.testing.assert_array_equal(once.sigma, twice.sigma)
            np.testing.assert_array_equal(once.p, twice.p)

    def test_unknown_key(self, three_cluster_model):
        """Test that an unknown key is rejected."""
        with pytest.raises(ValueError):
            relabel_clusters(three_cluster_model(6), "degree")


class TestHelpers:
    """Test cluster paths and kernel differences."""

    def test_cluster_path(self):
        """Test mapping states to clusters."""
        path = SamplePath(n=4, symbols=np.array([0, 3, 1, 2]))
        result = cluster_path(path, np.array([0, 0, 1, 1]), 2)
        assert result.n == 2
        assert list(result.symbols) == [0, 1, 0, 1]

    def test_rank_one_difference(self):
        """Test the operator norm of a unit outer product."""
        u = np.array([0.6, 0.8, 0.0])
        v = np.array([0.0, 0.0, 1.0])
        assert model_difference(np.outer(u, v), np.zeros((3, 3))) == pytest.approx(1.0)
