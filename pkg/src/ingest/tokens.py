"""Token streams: frequency-filtered vocabularies, codons and path joining."""

import logging
from collections import Counter
from typing import List, Optional, Sequence

import numpy as np

from src.config import settings
from src.core.errors import EmptyAfterFilter, VocabularyMismatch
from src.core.models import SamplePath

logger = logging.getLogger(__name__)


def tokenize(
    symbols: Sequence[str], min_count: Optional[int] = None, drop_top: Optional[int] = None
) -> SamplePath:
    """Encode a token stream over a frequency-filtered vocabulary.

    Tokens are ranked by descending count, ties broken lexicographically. The
    ``drop_top`` most frequent are removed, then every token seen fewer than
    ``min_count`` times. Occurrences of removed tokens are dropped from the
    stream and ids follow the ranking.

    Args:
        symbols: Token stream
        min_count: Minimum number of occurrences to keep a token
        drop_top: Number of most frequent tokens to remove

    Returns:
        Sample path whose vocabulary holds the kept tokens

    Raises:
        EmptyAfterFilter: If no occurrence survives filtering
    """
    min_count = settings.min_count if min_count is None else min_count
    drop_top = settings.drop_top if drop_top is None else drop_top
    if len(symbols) == 0:
        raise ValueError("Cannot tokenize an empty stream")

    counts = Counter(symbols)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    kept = [token for token, count in ranked[drop_top:] if count >= min_count]
    if not kept:
        raise EmptyAfterFilter(
            f"No token left after dropping the top {drop_top} and those below {min_count} occurrences"
        )
    ids = {token: index for index, token in enumerate(kept)}
    encoded = np.array([ids[token] for token in symbols if token in ids], dtype=np.int64)
    logger.info(
        f"Tokenized {len(symbols)} occurrences into {len(kept)} symbols, kept {encoded.size} occurrences"
    )
    return SamplePath(n=len(kept), symbols=encoded, vocabulary=tuple(kept))


def codons(sequence: str) -> List[str]:
    """Consecutive nucleotide triplets; whitespace is ignored and a partial tail is dropped."""
    bases = "".join(sequence.split()).upper()
    return [bases[k : k + 3] for k in range(0, len(bases) - 2, 3)]


def concat_paths(paths: Sequence[SamplePath]) -> SamplePath:
    """Join paths over the same alphabet in list order.

    Raises:
        VocabularyMismatch: If the paths differ in alphabet size or vocabulary
    """
    if not paths:
        raise ValueError("Need at least one path to concatenate")
    first = paths[0]
    for index, path in enumerate(paths[1:], start=1):
        if path.n != first.n or path.vocabulary != first.vocabulary:
            raise VocabularyMismatch(f"Path {index} does not share the alphabet of path 0")
    return SamplePath(
        n=first.n,
        symbols=np.concatenate([path.symbols for path in paths]),
        vocabulary=first.vocabulary,
    )
