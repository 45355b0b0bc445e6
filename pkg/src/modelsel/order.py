"""Higher-order Markov models of cluster paths and CAIC order selection."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.config import settings
from src.core.errors import DimensionMismatch, InvalidModel, PathTooShort
from src.core.models import SamplePath, validate_stochastic

logger = logging.getLogger(__name__)

# Tables with more cells than this are stored sparse
DENSE_TABLE_LIMIT = 1_000_000

Penalty = Callable[[int, int, int], float]


@dataclass(frozen=True, eq=False)
class OrderModel:
    """rth-order transition table over m symbols.

    Row ``c`` is the window whose base-m code is ``c`` (oldest symbol first).
    Rows of unseen windows are zero.

    Attributes:
        m: Alphabet size
        r: Order
        Q: (m^r)×m table, dense or CSR
    """

    m: int
    r: int
    Q: object

    def __post_init__(self):
        if self.r < 0 or self.m < 1:
            raise InvalidModel(f"Invalid order model with m={self.m}, r={self.r}")
        table = validate_stochastic(self.Q, "order-r table", allow_zero_rows=True, square=False)
        if table.shape != (self.m**self.r, self.m):
            raise InvalidModel(f"Table shape {table.shape} does not match m={self.m}, r={self.r}")
        object.__setattr__(self, "Q", table)

    def table(self) -> np.ndarray:
        """Dense copy of the table."""
        return self.Q.toarray() if sp.issparse(self.Q) else np.array(self.Q)

    def probabilities(self, codes: np.ndarray, symbols: np.ndarray) -> np.ndarray:
        if sp.issparse(self.Q):
            return np.asarray(self.Q[codes, symbols]).ravel()
        return self.Q[codes, symbols]


def degrees_of_freedom(m: int, r: int) -> int:
    """Free parameters m^r (m - 1) of an rth-order model over m symbols."""
    return m**r * (m - 1)


def aic_penalty(df: int, length: int, r: int) -> float:
    return 2.0 * df


def caic_penalty(df: int, length: int, r: int) -> float:
    """2 DF (1 + ln(l - r))."""
    return 2.0 * df * (1.0 + np.log(length - r))


def get_penalty(name: str) -> Penalty:
    """Look up a penalty by name.

    Raises:
        ValueError: If the name is unknown
    """
    if name == "caic":
        return caic_penalty
    elif name == "aic":
        return aic_penalty
    else:
        raise ValueError(f"Unknown penalty: {name}. Use 'caic' or 'aic'.")


def window_codes(path: SamplePath, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Window codes and next symbols over the positions used for fitting.

    The windows are y[t-r:t] with next symbol y[t] for r <= t < l - r; with
    r = 0 every symbol is used.
    """
    y = path.symbols
    stop = len(y) - r
    if r == 0:
        return np.zeros(len(y), dtype=np.int64), y.copy()
    if stop <= r:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    codes = np.zeros(stop - r, dtype=np.int64)
    for offset in range(r):
        codes = codes * path.n + y[offset : stop - r + offset]
    return codes, y[r:stop]


def mle_order_model(path: SamplePath, r: int) -> OrderModel:
    """Maximum-likelihood rth-order table from window counts.

    Raises:
        PathTooShort: If the path is not longer than r
    """
    if r < 0:
        raise ValueError(f"Order must be nonnegative, got {r}")
    if len(path) <= r:
        raise PathTooShort(f"Need more than {r} symbols, got {len(path)}")
    m = path.n
    codes, nxt = window_codes(path, r)
    rows = m**r
    counts = sp.csr_matrix(
        (np.ones(codes.size), (codes, nxt)), shape=(rows, m)
    )
    counts.sum_duplicates()
    mass = np.asarray(counts.sum(axis=1)).ravel()
    scale = np.divide(1.0, mass, out=np.zeros_like(mass), where=mass > 0)
    table = sp.csr_matrix(sp.diags(scale) @ counts)
    if rows * m <= DENSE_TABLE_LIMIT:
        table = table.toarray()
    return OrderModel(m=m, r=r, Q=table)


def order_loglik(path: SamplePath, model: OrderModel) -> float:
    """Log-likelihood of the fitting windows; ``-inf`` if any has probability zero."""
    if path.n != model.m:
        raise DimensionMismatch(f"Path over {path.n} symbols, model over {model.m}")
    codes, nxt = window_codes(path, model.r)
    if codes.size == 0:
        return 0.0
    probabilities = model.probabilities(codes, nxt)
    if np.any(probabilities == 0):
        return float("-inf")
    return float(np.sum(np.log(probabilities)))


def caic(path: SamplePath, model: OrderModel, penalty: Optional[Penalty] = None) -> float:
    """-2 loglik + penalty(DF, l, r); CAIC by default."""
    penalty = penalty or caic_penalty
    df = degrees_of_freedom(model.m, model.r)
    return -2.0 * order_loglik(path, model) + penalty(df, len(path), model.r)


def select_order(
    path: SamplePath, r_max: Optional[int] = None, penalty: Optional[Penalty] = None
) -> Tuple[int, Dict[int, float]]:
    """Order in 0..r_max minimizing the criterion; ties go to the smaller order.

    Returns:
        ``(r, {order: criterion})``

    Raises:
        PathTooShort: If the path is not longer than r_max
    """
    r_max = settings.r_max if r_max is None else r_max
    if len(path) <= r_max:
        raise PathTooShort(f"Need more than {r_max} symbols, got {len(path)}")
    table: Dict[int, float] = {}
    best = 0
    for r in range(r_max + 1):
        table[r] = caic(path, mle_order_model(path, r), penalty)
        logger.debug(f"Order {r}: criterion {table[r]:.6g}")
        if table[r] < table[best]:
            best = r
    logger.info(f"Selected order {best} out of 0..{r_max}")
    return best, table
