"""
Thread pool helpers.

Results always come back in input order, so reductions over them are
independent of scheduling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from config import CLI_CONFIG

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def worker_count(default: Optional[int] = None) -> int:
    """
    Number of worker threads.

    Reads CONTRAKT_THREADS; falls back to the number of cores.
    """
    raw = os.getenv(CLI_CONFIG['threads_env'])
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid {CLI_CONFIG['threads_env']}={raw!r}")
    if default is not None:
        return default
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply fn to every item, preserving input order."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
