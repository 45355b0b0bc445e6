"""Ordered parallel map over independent tasks."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

from src.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = None,
    progress: bool = False,
    description: str = "",
) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    Args:
        func: Pure function of one item
        items: Task inputs
        threads: Worker cap (defaults to ``settings.threads``)
        progress: Show a progress bar on stderr
        description: Progress bar label

    Returns:
        Results in the order of ``items``
    """
    tasks = list(items)
    workers = max(1, min(threads or settings.threads, len(tasks) or 1))
    bar = dict(total=len(tasks), desc=description, disable=not progress)
    if workers == 1:
        return [func(task) for task in tqdm(tasks, **bar)]
    logger.debug(f"Running {len(tasks)} tasks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(func, tasks), **bar))
