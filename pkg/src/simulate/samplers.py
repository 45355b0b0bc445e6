"""Seeded samplers for Markov, block Markov and related chains."""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from src.core.equilibrium import state_equilibrium, stationary_distribution
from src.core.errors import DimensionMismatch, InvalidModel, MissingRow, PathTooShort
from src.core.kernels import state_kernel_of
from src.core.models import (
    ClusterModel,
    Distribution,
    SamplePath,
    StateKernel,
    sigma_from_sizes,
    validate_stochastic,
)
from src.simulate.rng import Stream, make_generator, make_streams

logger = logging.getLogger(__name__)

Start = Union[int, str]

EQUILIBRIUM = "equilibrium"


def default_length(n: int) -> int:
    """Path length floor(30 n ln n) used by the recovery experiments."""
    return int(math.floor(30 * n * math.log(n)))


class _RowSampler:
    """Inverse-CDF draws from the rows of a sparse or dense kernel."""

    def __init__(self, matrix):
        csr = sp.csr_matrix(matrix, dtype=float)
        csr.eliminate_zeros()
        csr.sort_indices()
        self.indptr = csr.indptr
        self.indices = csr.indices
        self.cdf = np.empty_like(csr.data)
        for row in range(csr.shape[0]):
            lo, hi = csr.indptr[row], csr.indptr[row + 1]
            self.cdf[lo:hi] = np.cumsum(csr.data[lo:hi])

    def draw(self, row: int, u: float) -> int:
        lo, hi = self.indptr[row], self.indptr[row + 1]
        k = lo + int(np.searchsorted(self.cdf[lo:hi], u, side="right"))
        return int(self.indices[min(k, hi - 1)])


def _cluster_layout(sigma: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    order = np.argsort(sigma, kind="stable")
    sizes = np.bincount(sigma, minlength=m)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return order, offsets, sizes


def _draw_categorical(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probabilities)
    positive = np.flatnonzero(probabilities > 0)
    k = int(np.searchsorted(cdf, rng.random(), side="right"))
    return int(min(k, positive[-1]))


def _initial_state(start: Start, n: int, equilibrium, rng: np.random.Generator) -> int:
    if isinstance(start, str):
        if start != EQUILIBRIUM:
            raise ValueError(f"Unknown start rule '{start}'")
        return _draw_categorical(equilibrium().values, rng)
    state = int(start)
    if not 0 <= state < n:
        raise ValueError(f"Start state {state} outside [0, {n})")
    return state


def _check_length(length: int, minimum: int = 1) -> int:
    length = int(length)
    if length < minimum:
        raise PathTooShort(f"Path length must be at least {minimum}, got {length}")
    return length


def _check_epsilon(epsilon: float) -> float:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    return float(epsilon)


def sample_mc(kernel: StateKernel, length: int, seed: int, start: Start = EQUILIBRIUM) -> SamplePath:
    """Sample a Markov chain path from a state kernel.

    Args:
        kernel: Row-stochastic state kernel
        length: Number of symbols
        seed: Integer seed
        start: Fixed state id or ``"equilibrium"``

    Returns:
        Sample path of the requested length

    Raises:
        NonErgodic: If an equilibrium start is requested on a non-ergodic kernel
    """
    length = _check_length(length)
    streams = make_streams(seed)
    x = _initial_state(start, kernel.n, lambda: stationary_distribution(kernel.P), streams[Stream.START])
    rows = _RowSampler(kernel.P)
    steps = streams[Stream.STEP].random(length - 1)

    symbols = np.empty(length, dtype=np.int64)
    symbols[0] = x
    for t in range(1, length):
        x = rows.draw(x, steps[t - 1])
        symbols[t] = x
    logger.debug(f"Sampled Markov chain path of length {length} on {kernel.n} states")
    return SamplePath(n=kernel.n, symbols=symbols)


def _cluster_step_table(p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    cdf = np.cumsum(p, axis=1)
    last = np.array([np.flatnonzero(row > 0)[-1] for row in p])
    return cdf, last


def _bmc_state_steps(
    model: ClusterModel,
    x0: int,
    length: int,
    steps: np.ndarray,
    members: np.ndarray,
    coins: Optional[np.ndarray] = None,
    delta: Optional[_RowSampler] = None,
    delta_steps: Optional[np.ndarray] = None,
) -> np.ndarray:
    order, offsets, sizes = _cluster_layout(model.sigma, model.m)
    cdf, last = _cluster_step_table(model.p)
    sigma = model.sigma
    symbols = np.empty(length, dtype=np.int64)
    symbols[0] = x0

    if coins is None:
        clusters = np.empty(length, dtype=np.int64)
        k = int(sigma[x0])
        clusters[0] = k
        for t in range(1, length):
            k = min(int(np.searchsorted(cdf[k], steps[t - 1], side="right")), int(last[k]))
            clusters[t] = k
        tail = clusters[1:]
        picks = np.minimum((members * sizes[tail]).astype(np.int64), sizes[tail] - 1)
        symbols[1:] = order[offsets[tail] + picks]
        return symbols

    x = x0
    for t in range(1, length):
        if coins[t - 1]:
            x = delta.draw(x, delta_steps[t - 1])
        else:
            k = int(sigma[x])
            k = min(int(np.searchsorted(cdf[k], steps[t - 1], side="right")), int(last[k]))
            pick = min(int(members[t - 1] * sizes[k]), int(sizes[k]) - 1)
            x = int(order[offsets[k] + pick])
        symbols[t] = x
    return symbols


def sample_bmc(model: ClusterModel, length: int, seed: int, start: Start = EQUILIBRIUM) -> SamplePath:
    """Sample a block Markov chain without materializing the n×n kernel.

    The next cluster is drawn from p, then the state uniformly inside it.

    Args:
        model: Cluster model (n is the length of sigma)
        length: Number of symbols
        seed: Integer seed
        start: Fixed state id or ``"equilibrium"``

    Returns:
        Sample path over n states
    """
    length = _check_length(length)
    streams = make_streams(seed)
    x0 = _initial_state(start, model.n, lambda: state_equilibrium(model), streams[Stream.START])
    steps = streams[Stream.STEP].random(length - 1)
    members = streams[Stream.MEMBER].random(length - 1)
    symbols = _bmc_state_steps(model, x0, length, steps, members)
    logger.debug(f"Sampled BMC path of length {length} on {model.n} states, m={model.m}")
    return SamplePath(n=model.n, symbols=symbols)


def sample_perturbed_bmc(
    model: ClusterModel,
    delta: StateKernel,
    epsilon: float,
    length: int,
    seed: int,
    start: Start = EQUILIBRIUM,
) -> SamplePath:
    """Sample a BMC whose every step follows delta with probability epsilon.

    With ``epsilon == 0`` the output is bit-identical to ``sample_bmc`` for the same seed.

    Raises:
        DimensionMismatch: If delta is not n×n
    """
    epsilon = _check_epsilon(epsilon)
    length = _check_length(length)
    if delta.n != model.n:
        raise DimensionMismatch(f"Perturbation is {delta.n}x{delta.n}, model has n={model.n}")

    def equilibrium() -> Distribution:
        if epsilon == 0:
            return state_equilibrium(model)
        mixed = (1 - epsilon) * state_kernel_of(model).P + epsilon * delta.toarray()
        return stationary_distribution(mixed)

    streams = make_streams(seed)
    x0 = _initial_state(start, model.n, equilibrium, streams[Stream.START])
    steps = streams[Stream.STEP].random(length - 1)
    members = streams[Stream.MEMBER].random(length - 1)
    if epsilon == 0:
        symbols = _bmc_state_steps(model, x0, length, steps, members)
    else:
        coins = streams[Stream.COIN].random(length - 1) < epsilon
        delta_steps = streams[Stream.DELTA].random(length - 1)
        symbols = _bmc_state_steps(
            model, x0, length, steps, members, coins, _RowSampler(delta.P), delta_steps
        )
    logger.debug(f"Sampled perturbed BMC path (epsilon={epsilon}) of length {length}")
    return SamplePath(n=model.n, symbols=symbols)


def sample_mixture(
    P: StateKernel,
    delta: StateKernel,
    epsilon: float,
    length: int,
    seed: int,
    start: Start = EQUILIBRIUM,
) -> SamplePath:
    """Sample the chain that follows delta with probability epsilon and P otherwise.

    Raises:
        DimensionMismatch: If the kernels differ in size
    """
    epsilon = _check_epsilon(epsilon)
    length = _check_length(length)
    if delta.n != P.n:
        raise DimensionMismatch(f"Kernels have sizes {P.n} and {delta.n}")

    def equilibrium() -> Distribution:
        if epsilon == 0:
            return stationary_distribution(P.P)
        return stationary_distribution((1 - epsilon) * P.toarray() + epsilon * delta.toarray())

    streams = make_streams(seed)
    x = _initial_state(start, P.n, equilibrium, streams[Stream.START])
    base, nuisance = _RowSampler(P.P), _RowSampler(delta.P)
    steps = streams[Stream.STEP].random(length - 1)
    coins = streams[Stream.COIN].random(length - 1) < epsilon
    delta_steps = streams[Stream.DELTA].random(length - 1)

    symbols = np.empty(length, dtype=np.int64)
    symbols[0] = x
    for t in range(1, length):
        if coins[t - 1]:
            x = nuisance.draw(x, delta_steps[t - 1])
        else:
            x = base.draw(x, steps[t - 1])
        symbols[t] = x
    return SamplePath(n=P.n, symbols=symbols)


def sample_bmc0(eta: Distribution, sizes: Sequence[int], length: int, seed: int) -> SamplePath:
    """Sample an i.i.d. cluster sequence with uniform states inside clusters.

    Args:
        eta: Cluster probabilities
        sizes: Number of states per cluster (clusters listed contiguously)
        length: Number of symbols
        seed: Integer seed

    Returns:
        Sample path over sum(sizes) states
    """
    length = _check_length(length)
    sizes = np.asarray(sizes, dtype=np.int64)
    values = eta.values
    if sizes.size != values.size:
        raise DimensionMismatch(f"eta has {values.size} clusters, sizes has {sizes.size}")
    if np.any((values > 0) & (sizes < 1)):
        raise InvalidModel("A cluster with positive mass has no states")

    streams = make_streams(seed)
    cdf = np.cumsum(values)
    last = np.flatnonzero(values > 0)[-1]
    clusters = np.minimum(
        np.searchsorted(cdf, streams[Stream.STEP].random(length), side="right"), last
    )
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    picks = (streams[Stream.MEMBER].random(length) * sizes[clusters]).astype(np.int64)
    symbols = offsets[clusters] + np.minimum(picks, sizes[clusters] - 1)
    return SamplePath(n=int(sizes.sum()), symbols=symbols)


def sample_rth_order(
    Q: np.ndarray, length: int, seed: int, initial_window: Sequence[int] = ()
) -> SamplePath:
    """Sample an rth-order chain over {0..m-1}.

    Args:
        Q: (m^r)×m table; row index is the base-m code of the window, oldest symbol first
        length: Number of symbols, including the initial window
        seed: Integer seed
        initial_window: The first r symbols

    Returns:
        Sample path over m symbols

    Raises:
        MissingRow: If the chain reaches a window whose row is all zero
    """
    Q = validate_stochastic(np.asarray(Q, dtype=float), "order-r table", allow_zero_rows=True, square=False)
    m = Q.shape[1]
    window = [int(s) for s in initial_window]
    r = len(window)
    if Q.shape[0] != m**r:
        raise DimensionMismatch(f"Table has {Q.shape[0]} rows, expected {m}^{r}")
    if any(not 0 <= s < m for s in window):
        raise ValueError(f"Initial window {window} has symbols outside [0, {m})")
    length = _check_length(length, max(r, 1))

    cdf = np.cumsum(Q, axis=1)
    positive = Q > 0
    last = np.where(positive.any(axis=1), m - 1 - np.argmax(positive[:, ::-1], axis=1), -1)
    modulus = m ** max(r - 1, 0)
    code = 0
    for s in window:
        code = code * m + s
    steps = make_streams(seed)[Stream.STEP].random(length - r)

    symbols = np.empty(length, dtype=np.int64)
    symbols[:r] = window
    for t in range(r, length):
        if last[code] < 0:
            raise MissingRow(tuple(int(s) for s in symbols[t - r : t]))
        nxt = min(int(np.searchsorted(cdf[code], steps[t - r], side="right")), int(last[code]))
        symbols[t] = nxt
        if r > 0:
            code = (code % modulus) * m + nxt
    return SamplePath(n=m, symbols=symbols)


def exponential_weights(sizes: Sequence[int], seed: int) -> List[Distribution]:
    """Per-cluster within-cluster weights from normalized Exp(1) draws."""
    rng = make_generator(seed)
    return [Distribution(w / w.sum()) for w in (rng.exponential(1.0, int(s)) for s in sizes)]


def _dc_layout(p: np.ndarray, mu: Sequence[Distribution], sigma: Optional[np.ndarray]):
    p = validate_stochastic(np.asarray(p, dtype=float), "cluster transition matrix")
    m = p.shape[0]
    if len(mu) != m:
        raise DimensionMismatch(f"Got {len(mu)} within-cluster laws for m={m}")
    sizes = [len(weights) for weights in mu]
    sigma = sigma_from_sizes(sizes) if sigma is None else np.asarray(sigma, dtype=np.int64)
    if list(np.bincount(sigma, minlength=m)) != sizes:
        raise DimensionMismatch("Cluster sizes of sigma do not match the within-cluster laws")
    weights = np.empty(sigma.size)
    for k, law in enumerate(mu):
        weights[np.flatnonzero(sigma == k)] = law.values
    return p, sigma, weights


def dcbmc_kernel(
    p: np.ndarray, mu: Sequence[Distribution], sigma: Optional[np.ndarray] = None
) -> StateKernel:
    """Degree-corrected kernel P_ij = p_sigma(i),sigma(j) * mu_sigma(j)(j)."""
    p, sigma, weights = _dc_layout(p, mu, sigma)
    return StateKernel(p[np.ix_(sigma, sigma)] * weights[None, :])


def sample_dcbmc(
    p: np.ndarray,
    mu: Sequence[Distribution],
    length: int,
    seed: int,
    start: Start = EQUILIBRIUM,
    sigma: Optional[np.ndarray] = None,
) -> SamplePath:
    """Sample a degree-corrected BMC: clusters follow p, states inside follow mu.

    Args:
        p: m×m cluster transition matrix
        mu: One distribution per cluster over its members in increasing id order
        length: Number of symbols
        seed: Integer seed
        start: Fixed state id or ``"equilibrium"``
        sigma: Cluster map (defaults to contiguous blocks sized by mu)

    Returns:
        Sample path over sum(len(mu_k)) states
    """
    length = _check_length(length)
    p, sigma, weights = _dc_layout(p, mu, sigma)
    m = p.shape[0]
    order, offsets, sizes = _cluster_layout(sigma, m)
    within = [np.cumsum(weights[order[offsets[k] : offsets[k] + sizes[k]]]) for k in range(m)]
    cdf, last = _cluster_step_table(p)

    def equilibrium() -> Distribution:
        pi = stationary_distribution(p).values
        return Distribution(pi[sigma] * weights)

    streams = make_streams(seed)
    x = _initial_state(start, sigma.size, equilibrium, streams[Stream.START])
    steps = streams[Stream.STEP].random(length - 1)
    members = streams[Stream.MEMBER].random(length - 1)

    symbols = np.empty(length, dtype=np.int64)
    symbols[0] = x
    for t in range(1, length):
        k = int(sigma[x])
        k = min(int(np.searchsorted(cdf[k], steps[t - 1], side="right")), int(last[k]))
        pick = min(int(np.searchsorted(within[k], members[t - 1], side="right")), int(sizes[k]) - 1)
        x = int(order[offsets[k] + pick])
        symbols[t] = x
    return SamplePath(n=int(sigma.size), symbols=symbols)
