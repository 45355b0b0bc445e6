"""Unit tests for transition counts."""

import numpy as np
import pytest
import scipy.sparse as sp

from src.core.equilibrium import state_equilibrium
from src.core.errors import DimensionMismatch, PathTooShort
from src.core.kernels import state_kernel_of
from src.core.models import SamplePath
from src.counts.frequency import (
    CountMatrix,
    cluster_frequency_matrix,
    cluster_transition_matrix,
    frequency_matrix,
    laplacian,
    remove_self_jumps,
    split_path,
    sum_counts,
    trim,
)
from src.simulate.samplers import sample_bmc


def counts_of(dense) -> CountMatrix:
    dense = np.asarray(dense)
    return CountMatrix(n=dense.shape[0], matrix=sp.csr_matrix(dense))


class TestFrequencyMatrix:
    """Test frequency_matrix."""

    def test_hand_count(self):
        """Test the path 0, 1, 0, 0."""
        counts = frequency_matrix(SamplePath(n=2, symbols=np.array([0, 1, 0, 0])))
        np.testing.assert_array_equal(counts.toarray(), [[1, 1], [1, 0]])
        assert counts.total == 3

    def test_constant_path(self):
        """Test that a constant path only counts the diagonal."""
        counts = frequency_matrix(SamplePath(n=3, symbols=np.full(10, 2)))
        assert list(counts.triplets()) == [(2, 2, 9)]

    def test_too_short(self):
        """Test that a single symbol has no transitions."""
        with pytest.raises(PathTooShort):
            frequency_matrix(SamplePath(n=2, symbols=np.array([0])))

    def test_total_and_flow_balance(self):
        """Test total l-1 and |out - in| <= 2 on random paths."""
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 8))
            length = int(rng.integers(2, 60))
            counts = frequency_matrix(SamplePath(n=n, symbols=rng.integers(0, n, length)))
            assert counts.total == length - 1
            assert np.abs(counts.row_sums - counts.col_sums).max() <= 2

    def test_expectation(self, three_cluster_model):
        """Test N / (l - 1) against diag(Pi) P."""
        model = three_cluster_model(6)
        path = sample_bmc(model, 300_000, seed=0)
        observed = frequency_matrix(path).toarray() / (len(path) - 1)
        expected = state_equilibrium(model).values[:, None] * state_kernel_of(model).P
        np.testing.assert_allclose(observed, expected, atol=0.01)

    def test_sorted_triplets(self):
        """Test row-major triplet iteration."""
        counts = frequency_matrix(SamplePath(n=3, symbols=np.array([2, 0, 1, 0])))
        assert list(counts.triplets()) == [(0, 1, 1), (1, 0, 1), (2, 0, 1)]


class TestTrim:
    """Test trim."""

    def test_zero_is_identity(self):
        """Test gamma = 0."""
        counts = counts_of([[1, 2], [3, 4]])
        assert trim(counts, 0) is counts

    def test_all_states(self):
        """Test gamma = n."""
        trimmed = trim(counts_of([[1, 2], [3, 4]]), 2)
        assert trimmed.total == 0
        assert trimmed.trimmed == frozenset({0, 1})

    def test_highest_degree(self):
        """Test that the highest-degree state is removed."""
        dense = np.array([[2, 1, 0], [1, 0, 0], [0, 0, 1]])
        trimmed = trim(counts_of(dense), 1)
        assert trimmed.trimmed == frozenset({0})
        np.testing.assert_array_equal(trimmed.toarray(), [[0, 0, 0], [0, 0, 0], [0, 0, 1]])

    def test_tie_lower_id(self):
        """Test that ties go to the lower state id."""
        trimmed = trim(counts_of([[0, 1], [1, 0]]), 1)
        assert trimmed.trimmed == frozenset({0})

    def test_laplacian_zero_on_trimmed(self, three_cluster_model):
        """Test that trimmed states have zero Laplacian rows and columns."""
        counts = trim(frequency_matrix(sample_bmc(three_cluster_model(12), 5_000, seed=1)), 3)
        L = laplacian(counts)
        for state in counts.trimmed:
            assert not L[state].any()
            assert not L[:, state].any()


class TestLaplacian:
    """Test laplacian."""

    def test_single_entry(self):
        """Test N = [[2, 0], [0, 0]]."""
        np.testing.assert_allclose(laplacian(counts_of([[2, 0], [0, 0]])), [[1, 0], [0, 0]])

    def test_symmetric(self):
        """Test symmetry for symmetric counts."""
        L = laplacian(counts_of([[1, 3, 0], [3, 0, 2], [0, 2, 5]]))
        np.testing.assert_allclose(L, L.T)

    def test_uniform(self):
        """Test all-ones counts on three states."""
        np.testing.assert_allclose(laplacian(counts_of(np.ones((3, 3), dtype=int))), 1 / 3)

    def test_range(self):
        """Test that entries lie in [0, 1]."""
        rng = np.random.default_rng(2)
        L = laplacian(counts_of(rng.integers(0, 5, (8, 8))))
        assert L.min() >= 0
        assert L.max() <= 1


class TestPathAlgebra:
    """Test self-jump removal, splitting and summing."""

    @pytest.mark.parametrize(
        "symbols,expected",
        [([0, 0, 0], [0]), ([0, 1, 1, 0], [0, 1, 0]), ([0, 1, 0], [0, 1, 0])],
    )
    def test_remove_self_jumps(self, symbols, expected):
        """Test collapsing runs."""
        path = remove_self_jumps(SamplePath(n=2, symbols=np.array(symbols)))
        assert list(path.symbols) == expected

    def test_remove_self_jumps_idempotent(self):
        """Test idempotence on a random path."""
        path = SamplePath(n=3, symbols=np.random.default_rng(0).integers(0, 3, 200))
        once = remove_self_jumps(path)
        np.testing.assert_array_equal(remove_self_jumps(once).symbols, once.symbols)

    def test_split(self):
        """Test equal pieces with the remainder dropped."""
        pieces = split_path(SamplePath(n=2, symbols=np.arange(11) % 2), 3)
        assert [len(piece) for piece in pieces] == [3, 3, 3]
        assert list(pieces[1].symbols) == [1, 0, 1]

    def test_sum_identity(self):
        """Test that a single matrix is unchanged."""
        counts = counts_of([[1, 2], [3, 4]])
        np.testing.assert_array_equal(sum_counts([counts]).toarray(), counts.toarray())

    def test_sum_double(self):
        """Test that two copies give twice the counts."""
        counts = counts_of([[1, 2], [3, 4]])
        np.testing.assert_array_equal(sum_counts([counts, counts]).toarray(), 2 * counts.toarray())

    def test_sum_zero_diagonal(self):
        """Test zeroing the diagonal."""
        counts = counts_of([[1, 2], [3, 4]])
        np.testing.assert_array_equal(
            sum_counts([counts, counts], zero_diagonal=True).toarray(), [[0, 4], [6, 0]]
        )

    def test_sum_mismatch(self):
        """Test that sizes must agree."""
        with pytest.raises(DimensionMismatch):
            sum_counts([counts_of([[1]]), counts_of([[1, 0], [0, 1]])])


class TestClusterCounts:
    """Test cluster-level aggregation."""

    def test_cluster_counts(self):
        """Test aggregation over two clusters."""
        counts = counts_of([[1, 2, 0], [0, 0, 3], [4, 0, 0]])
        sigma = np.array([0, 0, 1])
        np.testing.assert_array_equal(cluster_frequency_matrix(counts, sigma, 2), [[3, 3], [4, 0]])
        np.testing.assert_allclose(cluster_transition_matrix(counts, sigma, 2), [[0.5, 0.5], [1, 0]])

    def test_zero_mass_row(self):
        """Test that a cluster without outgoing counts keeps a zero row."""
        counts = counts_of([[1, 1], [0, 0]])
        np.testing.assert_allclose(
            cluster_transition_matrix(counts, np.array([0, 1]), 2), [[0.5, 0.5], [0, 0]]
        )
