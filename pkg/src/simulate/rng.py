"""Seeded random streams.

Every sampler draws from PCG64 generators derived from one integer seed.
``SeedSequence([seed, *keys])`` names a sub-seed (keys are the experiment cell,
seed index or restart index), and its ``spawn`` children give the independent
streams used inside a single sampler, always in the order of ``Stream``.
"""

from enum import IntEnum
from typing import List

import numpy as np


class Stream(IntEnum):
    """Purpose of each spawned child stream."""

    START = 0
    STEP = 1
    MEMBER = 2
    COIN = 3
    DELTA = 4


def seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    """Seed sequence for ``seed`` refined by integer ``keys``."""
    if keys:
        return np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return np.random.SeedSequence(int(seed))


def make_generator(seed: int, *keys: int) -> np.random.Generator:
    """Single PCG64 generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))


def make_streams(seed: int, *keys: int) -> List[np.random.Generator]:
    """One generator per ``Stream`` member, derived from ``(seed, *keys)``."""
    children = seed_sequence(seed, *keys).spawn(len(Stream))
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def derive_seed(seed: int, *keys: int) -> int:
    """Plain integer sub-seed, for APIs that take an int (e.g. scikit-learn)."""
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])
