"""Ordered fan-out over per-workflow work items."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    """Number of workers used when --jobs is not given."""
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: Optional[int] = None,
                 desc: str = "", show_progress: bool = False) -> List[R]:
    """
    Apply fn to every item, possibly concurrently, keeping input order.

    Results come back in the order of items whatever the worker count, so the
    bytes written downstream never depend on --jobs.

    Args:
        fn: Function applied to each item
        items: Work items
        jobs: Worker count (None = number of CPUs, 1 = run inline)
        desc: Progress bar label
        show_progress: Draw a tqdm progress bar on stderr

    Returns:
        List of results aligned with items
    """
    work = list(items)
    workers = jobs if jobs is not None else default_jobs()
    bar = tqdm(total=len(work), desc=desc, disable=not show_progress, leave=False)
    try:
        if workers <= 1 or len(work) <= 1:
            results = []
            for item in work:
                results.append(fn(item))
                bar.update(1)
            return results

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = []
            for result in pool.map(fn, work):
                results.append(result)
                bar.update(1)
            return results
    finally:
        bar.close()
