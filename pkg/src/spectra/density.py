"""Limiting singular-value density of a block variance profile.

The density follows from a 2m-dimensional fixed point a(z) in the lower
half plane:

    a_k(z)     = 1 / (z - sum_l alpha_l S_kl a_{m+l}(z))
    a_{m+k}(z) = 1 / (z - sum_l alpha_l S_lk a_l(z))

solved for z = x + i*eta at every grid point. The symmetrized Stieltjes
transform is s = sum_k alpha_k (a_k + a_{m+k}) / 2 and the density of the
singular values on x > 0 is -(2 / pi) Im s(x + i*eta).
"""

import logging
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.config import settings
from src.core.errors import NoConvergence
from src.spectra.empirical import SpectralDensity
from src.spectra.profiles import BlockVarianceProfile

logger = logging.getLogger(__name__)

# Damped steps hand over to Newton once successive iterates are this close
NEWTON_SWITCH = 1e-4


def _coupling(profile: BlockVarianceProfile):
    forward = profile.S * profile.alpha[None, :]
    backward = profile.S.T * profile.alpha[None, :]
    return forward, backward


def _fixed_point_map(a: np.ndarray, z: np.ndarray, forward, backward) -> np.ndarray:
    m = forward.shape[0]
    mapped = np.empty_like(a)
    mapped[:, :m] = 1.0 / (z[:, None] - a[:, m:] @ forward.T)
    mapped[:, m:] = 1.0 / (z[:, None] - a[:, :m] @ backward.T)
    return mapped


def _newton_step(a: np.ndarray, z: np.ndarray, forward, backward) -> np.ndarray:
    m = forward.shape[0]
    mapped = _fixed_point_map(a, z, forward, backward)
    jacobian = np.tile(np.eye(2 * m, dtype=complex), (len(z), 1, 1))
    jacobian[:, :m, m:] -= (mapped[:, :m] ** 2)[:, :, None] * forward[None, :, :]
    jacobian[:, m:, :m] -= (mapped[:, m:] ** 2)[:, :, None] * backward[None, :, :]
    delta = np.linalg.solve(jacobian, (mapped - a)[:, :, None])[:, :, 0]
    return a + delta


def solve_fixed_point(
    profile: BlockVarianceProfile,
    z: np.ndarray,
    damping: Optional[float] = None,
    tolerance: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> np.ndarray:
    """Solve the fixed point at every z in the upper half plane.

    Iteration starts from a = 1/z and takes damped steps
    a <- (1 - damping) a + damping F(a). Once a point's steps fall below
    ``NEWTON_SWITCH`` a Newton step is tried and kept when it stays in the
    lower half plane. A point has converged once successive iterates differ
    by less than ``tolerance``.

    Args:
        profile: Block variance profile
        z: Complex evaluation points with positive imaginary part
        damping: Step weight in (0, 1]
        tolerance: Convergence threshold on successive iterates
        max_iterations: Iteration budget shared by all points

    Returns:
        Complex array of shape (len(z), 2m)

    Raises:
        NoConvergence: If some point has not converged within the budget
    """
    damping = settings.damping if damping is None else damping
    tolerance = tolerance or settings.fixed_point_tolerance
    max_iterations = max_iterations or settings.fixed_point_max_iterations
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("Evaluation points must lie in the upper half plane")
    if not 0 < damping <= 1:
        raise ValueError(f"Damping must lie in (0, 1], got {damping}")

    forward, backward = _coupling(profile)
    a = np.tile((1.0 / z)[:, None], (1, 2 * profile.m))
    done = np.zeros(len(z), dtype=bool)
    change = np.full(len(z), np.inf)

    for iteration in range(1, max_iterations + 1):
        active = np.flatnonzero(~done)
        if active.size == 0:
            break
        current, points = a[active], z[active]
        mapped = _fixed_point_map(current, points, forward, backward)
        step_size = np.abs(mapped - current).max(axis=1)
        proposal = current + damping * (mapped - current)

        near = np.flatnonzero(step_size < NEWTON_SWITCH)
        if near.size:
            polished = _newton_step(current[near], points[near], forward, backward)
            keep = np.all(np.isfinite(polished), axis=1) & np.all(polished.imag < 0, axis=1)
            proposal[near[keep]] = polished[keep]

        change[active] = np.abs(proposal - current).max(axis=1)
        a[active] = proposal
        done[active[change[active] < tolerance]] = True
    else:
        if not done.all():
            worst = int(np.argmax(np.where(done, -np.inf, change)))
            raise NoConvergence(float(z[worst].real), float(change[worst]), max_iterations)

    logger.debug(f"Fixed point converged at {len(z)} points after {iteration} iterations")
    return a


def stieltjes(profile: BlockVarianceProfile, z: np.ndarray, **solver_options) -> np.ndarray:
    """Symmetrized Stieltjes transform sum_k alpha_k (a_k + a_{m+k}) / 2."""
    a = solve_fixed_point(profile, z, **solver_options)
    m = profile.m
    return (a[:, :m] + a[:, m:]) @ profile.alpha / 2


def limiting_density(
    profile: BlockVarianceProfile,
    grid: np.ndarray,
    eta: Optional[float] = None,
    **solver_options,
) -> SpectralDensity:
    """Limiting singular-value density on a grid of nonnegative x.

    Args:
        profile: Block variance profile
        grid: Increasing nonnegative abscissae
        eta: Imaginary offset of the evaluation points
        **solver_options: ``damping``, ``tolerance``, ``max_iterations``

    Returns:
        Density curve f(x) = -(2 / pi) Im s(x + i*eta)

    Raises:
        NoConvergence: If the fixed point fails at some grid point
    """
    eta = eta or settings.eta
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("Grid must be a nonempty increasing vector of nonnegative values")
    s = stieltjes(profile, grid + 1j * eta, **solver_options)
    density = np.maximum(-2.0 / np.pi * s.imag, 0.0)
    return SpectralDensity(grid=grid, density=density, eta=eta)


def quarter_circle(grid: np.ndarray, variance: float = 1.0) -> SpectralDensity:
    """Quarter-circle density sqrt(4 v - x^2) / (pi v) on [0, 2 sqrt(v)]."""
    grid = np.asarray(grid, dtype=float)
    inside = np.clip(4 * variance - grid**2, 0.0, None)
    return SpectralDensity(grid=grid, density=np.sqrt(inside) / (np.pi * variance))


def _cdf(density: SpectralDensity):
    if density.is_histogram:
        knots = np.asarray(density.edges, dtype=float)
        cumulative = np.concatenate([[0.0], np.cumsum(density.density * np.diff(knots))])
    else:
        knots = np.asarray(density.grid, dtype=float)
        cumulative = cumulative_trapezoid(density.density, knots, initial=0.0)
    total = cumulative[-1]
    if total <= 0:
        raise ValueError("Density has no mass")
    return knots, cumulative / total


def compare_density(first: SpectralDensity, second: SpectralDensity) -> float:
    """Kolmogorov distance between two densities.

    Both CDFs are piecewise linear between their knots (bin edges for
    histograms, grid points for curves), normalized to unit mass, and
    compared on the union of the knots.
    """
    knots_a, cdf_a = _cdf(first)
    knots_b, cdf_b = _cdf(second)
    union = np.union1d(knots_a, knots_b)
    at_a = np.interp(union, knots_a, cdf_a, left=0.0, right=1.0)
    at_b = np.interp(union, knots_b, cdf_b, left=0.0, right=1.0)
    return float(np.max(np.abs(at_a - at_b)))
