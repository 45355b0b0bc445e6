"""Document vectors from a state clustering, and daily return leaders."""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from src.cluster.models import ClusterAssignment
from src.core.errors import DimensionMismatch
from src.core.models import SamplePath
from src.simulate.rng import make_generator

logger = logging.getLogger(__name__)


def cfidf_vectors(
    documents: Sequence[Sequence[str]], assignment: ClusterAssignment, vocabulary: Sequence[str]
) -> np.ndarray:
    """Cluster frequency times inverse document frequency per document.

    With c(k, d) the number of tokens of document d in cluster k and T_k the
    corpus total, cf(k, d) = ln(1 + c(k, d)) and
    idf(k) = ln(sum_k' (1 + T_k') / (1 + T_k)). Tokens outside the vocabulary
    are ignored.

    Returns:
        Array of shape (documents, m)

    Raises:
        DimensionMismatch: If the assignment does not cover the vocabulary
    """
    if assignment.n != len(vocabulary):
        raise DimensionMismatch(f"Assignment covers {assignment.n} states, vocabulary has {len(vocabulary)}")
    cluster_of = {token: int(assignment.labels[k]) for k, token in enumerate(vocabulary)}
    counts = np.zeros((len(documents), assignment.m))
    for d, document in enumerate(documents):
        clusters = [cluster_of[token] for token in document if token in cluster_of]
        counts[d] = np.bincount(np.asarray(clusters, dtype=np.int64), minlength=assignment.m)
    totals = counts.sum(axis=0)
    idf = np.log(np.sum(1 + totals) / (1 + totals))
    return np.log1p(counts) * idf[None, :]


def return_maximizers(opens: pd.DataFrame, closes: pd.DataFrame, seed: int = 0) -> SamplePath:
    """Ticker with the largest daily return close / open - 1, one symbol per day.

    Rows are days and columns tickers. Ties are broken uniformly at random and
    days without any return are skipped.

    Returns:
        Sample path over the tickers in column order
    """
    if list(opens.columns) != list(closes.columns) or not opens.index.equals(closes.index):
        raise DimensionMismatch("Open and close tables must share days and tickers")
    returns = (closes / opens - 1.0).to_numpy(dtype=float)
    rng = make_generator(seed)
    symbols = []
    for row in returns:
        valid = np.isfinite(row)
        if not valid.any():
            continue
        best = np.flatnonzero(valid & (row == np.max(row[valid])))
        symbols.append(int(best[0]) if best.size == 1 else int(rng.choice(best)))
    skipped = len(returns) - len(symbols)
    if skipped:
        logger.info(f"Skipped {skipped} days without any return")
    if not symbols:
        raise ValueError("No day has a valid return")
    tickers = tuple(str(ticker) for ticker in opens.columns)
    return SamplePath(n=len(tickers), symbols=np.array(symbols, dtype=np.int64), vocabulary=tickers)
