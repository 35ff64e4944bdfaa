"""
Order-preserving parallel map.
"""
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from utils.settings import APFIRE_THREADS

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``fn`` to every item, results in input order.

    Runs inline when APFIRE_THREADS is 1, otherwise on a thread pool capped by it.
    """
    items = list(items)
    if APFIRE_THREADS == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=APFIRE_THREADS) as pool:
        return list(pool.map(fn, items))
