"""Unit tests for singular-value spectra."""

import numpy as np
import pytest
import scipy.sparse as sp

from src.core.errors import InvalidModel, NoConvergence, NonErgodic
from src.core.models import ClusterModel, Distribution, SamplePath
from src.counts.frequency import CountMatrix, frequency_matrix
from src.simulate.samplers import sample_bmc, sample_bmc0
from src.spectra.density import (
    compare_density,
    limiting_density,
    quarter_circle,
    solve_fixed_point,
    stieltjes,
)
from src.spectra.empirical import (
    SpectralDensity,
    piece_histograms,
    regime_lambda,
    scaled_matrix,
    singular_values,
    sv_histogram,
)
from src.spectra.profiles import BlockVarianceProfile, frequency_profile, laplacian_profile

UNIT = BlockVarianceProfile(S=np.array([[1.0]]), alpha=np.array([1.0]))


@pytest.fixture(scope="module")
def uniform_path():
    """i.i.d. uniform path over 500 states with l = n^2."""
    n = 500
    return sample_bmc0(Distribution(np.array([1.0])), [n], n * n, seed=3)


class TestSvHistogram:
    """Test sv_histogram and singular_values."""

    def test_singular_values_sorted(self):
        """Test singular values of a diagonal matrix come out in decreasing order."""
        np.testing.assert_allclose(singular_values(np.diag([1.0, 3.0, 2.0])), [3.0, 2.0, 1.0])

    def test_sparse_input(self):
        """Test that sparse matrices are accepted."""
        values = singular_values(sp.csr_matrix(np.diag([2.0, 1.0])))
        np.testing.assert_allclose(values, [2.0, 1.0])

    def test_unit_mass(self):
        """Test that a histogram integrates to one."""
        values = np.random.default_rng(0).uniform(0, 2, 300)
        histogram = sv_histogram(values, bins=20)
        assert histogram.is_histogram
        assert histogram.mass() == pytest.approx(1.0)
        assert len(histogram.edges) == 21

    def test_equal_values(self):
        """Test that coinciding values give one unit bin."""
        histogram = sv_histogram(np.array([3.0, 3.0, 3.0]))
        np.testing.assert_allclose(histogram.edges, [2.5, 3.5])
        np.testing.assert_allclose(histogram.density, [1.0])

    def test_drop_and_scale(self):
        """Test dropping the leading value and scaling by sqrt(n)."""
        histogram = sv_histogram(np.array([1.0, 4.0, 1.0, 1.0]), scaling="sqrt_n", drop_leading=1)
        np.testing.assert_allclose(histogram.grid, [2.0])

    def test_drop_too_many(self):
        """Test that dropping every value is rejected."""
        with pytest.raises(ValueError):
            sv_histogram(np.array([1.0, 2.0]), drop_leading=2)


class TestScaledMatrix:
    """Test scaled_matrix and regime_lambda."""

    def test_frequency_scaling(self):
        """Test N / sqrt(n)."""
        counts = CountMatrix(n=4, matrix=sp.csr_matrix(np.eye(4, dtype=np.int64) * 2))
        np.testing.assert_allclose(scaled_matrix(counts, "frequency"), np.eye(4))

    def test_laplacian_top_singular_value(self):
        """Test that sqrt(n) L has top singular value sqrt(n) on a strongly connected path."""
        counts = frequency_matrix(SamplePath(n=4, symbols=np.array([0, 1, 2, 3] * 10 + [0])))
        values = singular_values(scaled_matrix(counts, "laplacian"))
        assert values[0] == pytest.approx(2.0)

    def test_unknown_kind(self):
        """Test that unknown matrix kinds are rejected."""
        counts = CountMatrix(n=2, matrix=sp.csr_matrix(np.eye(2, dtype=np.int64)))
        with pytest.raises(ValueError):
            scaled_matrix(counts, "adjacency")

    def test_regime_lambda(self):
        """Test lambda and the out-of-regime flag."""
        assert regime_lambda(10_000, 100) == (1.0, False)
        lam, out_of_regime = regime_lambda(100, 100)
        assert lam == pytest.approx(0.01)
        assert out_of_regime


class TestProfiles:
    """Test laplacian_profile and frequency_profile."""

    def test_symmetric_two_clusters(self):
        """Test both profiles on a symmetric two-cluster chain."""
        model = ClusterModel(m=2, sigma=np.array([0, 0, 1, 1]), p=np.array([[0.8, 0.2], [0.2, 0.8]]))
        expected = [[1.6, 0.4], [0.4, 1.6]]
        np.testing.assert_allclose(laplacian_profile(model, 1.0).S, expected)
        np.testing.assert_allclose(frequency_profile(model, 1.0).S, expected)

    def test_laplacian_fig1(self, three_cluster_model, three_cluster_pi):
        """Test S_kl = p_kl / pi_l for lambda = 1."""
        model = three_cluster_model(6)
        profile = laplacian_profile(model, 1.0)
        np.testing.assert_allclose(profile.S, model.p / three_cluster_pi[None, :])
        np.testing.assert_allclose(profile.alpha, [1 / 3, 1 / 3, 1 / 3])

    def test_single_cluster(self):
        """Test that m = 1 gives S = 1 for lambda = 1."""
        model = ClusterModel(m=1, sigma=np.zeros(5, dtype=np.int64), p=np.array([[1.0]]))
        assert laplacian_profile(model, 1.0).S[0, 0] == pytest.approx(1.0)
        assert frequency_profile(model, 1.0).S[0, 0] == pytest.approx(1.0)

    def test_non_ergodic(self):
        """Test that a reducible cluster chain is rejected."""
        model = ClusterModel(m=2, sigma=np.array([0, 1]), p=np.eye(2))
        with pytest.raises(NonErgodic):
            laplacian_profile(model, 1.0)

    def test_invalid_profile(self):
        """Test validation of block sizes and entries."""
        with pytest.raises(InvalidModel):
            BlockVarianceProfile(S=np.ones((2, 2)), alpha=np.array([0.7, 0.7]))
        with pytest.raises(InvalidModel):
            BlockVarianceProfile(S=-np.ones((1, 1)), alpha=np.array([1.0]))


class TestLimitingDensity:
    """Test the fixed-point solver and the limiting density."""

    def test_quarter_circle(self):
        """Test that S = 1 reproduces the quarter circle away from the edge."""
        grid = np.array([0.2, 0.5, 1.0, 1.5, 1.8])
        density = limiting_density(UNIT, grid, eta=1e-6)
        np.testing.assert_allclose(density.density, quarter_circle(grid).density, atol=1e-3)

    def test_stieltjes_far_away(self):
        """Test s(10i) close to 1 / (10i)."""
        s = stieltjes(UNIT, np.array([10j]))
        assert abs(s[0] - (-0.1j)) < 2e-3

    def test_lower_half_plane_and_residual(self):
        """Test Im a < 0 and a small fixed-point residual for random profiles."""
        rng = np.random.default_rng(5)
        for m in range(1, 5):
            profile = BlockVarianceProfile(S=rng.uniform(0.2, 2.0, (m, m)), alpha=rng.dirichlet(np.ones(m)))
            z = np.linspace(0.05, 3.0, 40) + 1e-3j
            a = solve_fixed_point(profile, z)
            assert np.all(a.imag < 0)
            forward = profile.S * profile.alpha[None, :]
            backward = profile.S.T * profile.alpha[None, :]
            residual_rows = np.abs(a[:, :m] - 1 / (z[:, None] - a[:, m:] @ forward.T))
            residual_cols = np.abs(a[:, m:] - 1 / (z[:, None] - a[:, :m] @ backward.T))
            assert residual_rows.max() < 1e-10
            assert residual_cols.max() < 1e-10

    def test_unit_mass(self):
        """Test that the density integrates to one within 2%."""
        rng = np.random.default_rng(11)
        for m in range(1, 5):
            S = rng.uniform(0.2, 2.0, (m, m))
            alpha = rng.dirichlet(np.ones(m))
            profile = BlockVarianceProfile(S=S, alpha=alpha)
            spread = max((S * alpha[None, :]).sum(axis=1).max(), (S.T * alpha[None, :]).sum(axis=1).max())
            grid = np.linspace(0.0, 2.5 * np.sqrt(spread) + 0.5, 3000)
            density = limiting_density(profile, grid)
            assert density.mass() == pytest.approx(1.0, abs=0.02)
            assert np.all(density.density >= 0)

    def test_budget_exhausted(self):
        """Test NoConvergence when the iteration budget is too small."""
        with pytest.raises(NoConvergence) as info:
            limiting_density(UNIT, np.array([0.5, 1.0]), max_iterations=1)
        assert info.value.x in (0.5, 1.0)

    def test_invalid_grid(self):
        """Test that negative or unsorted grids are rejected."""
        with pytest.raises(ValueError):
            limiting_density(UNIT, np.array([-1.0, 0.0]))
        with pytest.raises(ValueError):
            limiting_density(UNIT, np.array([1.0, 0.5]))


class TestCompareDensity:
    """Test compare_density."""

    def test_identical(self):
        """Test distance zero for identical inputs."""
        curve = quarter_circle(np.linspace(0, 2, 200))
        assert compare_density(curve, curve) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint(self):
        """Test distance one for disjoint unit masses."""
        histogram = SpectralDensity(
            grid=np.array([0.5]), density=np.array([1.0]), edges=np.array([0.0, 1.0])
        )
        curve = SpectralDensity(grid=np.array([2.0, 3.0]), density=np.array([1.0, 1.0]))
        assert compare_density(histogram, curve) == pytest.approx(1.0)

    def test_empirical_quarter_circle(self, uniform_path):
        """Test that sqrt(n) L of an i.i.d. uniform path follows the quarter circle."""
        counts = frequency_matrix(uniform_path)
        histogram = sv_histogram(singular_values(scaled_matrix(counts, "laplacian")), drop_leading=1)
        model = ClusterModel(m=1, sigma=np.zeros(uniform_path.n, dtype=np.int64), p=np.array([[1.0]]))
        lam, _ = regime_lambda(len(uniform_path), uniform_path.n)
        theory = limiting_density(laplacian_profile(model, lam), np.linspace(0.0, 2.5, 500))
        assert compare_density(histogram, theory) < 0.05
        assert compare_density(histogram, quarter_circle(np.linspace(0.0, 2.5, 500))) < 0.05

    def test_piece_histograms(self, uniform_path):
        """Test that averaged piece histograms keep unit mass on shared edges."""
        histogram = piece_histograms(uniform_path, "frequency", pieces=4, bins=30, drop_leading=1)
        assert len(histogram.edges) == 31
        assert histogram.mass() == pytest.approx(1.0)

    @pytest.mark.slow
    def test_three_cluster_law(self, three_cluster_model):
        """Test the pooled sqrt(n) L spectrum of 10 paths at n=1000, lambda=1 against the solver."""
        n = 1000
        model = three_cluster_model(n)
        pooled = []
        for seed in range(10):
            counts = frequency_matrix(sample_bmc(model, n * n, seed=seed))
            pooled.append(singular_values(scaled_matrix(counts, "laplacian"))[3:])
        histogram = sv_histogram(np.concatenate(pooled))
        theory = limiting_density(laplacian_profile(model, 1.0), np.linspace(0.0, 5.0, 1000))
        assert compare_density(histogram, theory) <= 0.05
