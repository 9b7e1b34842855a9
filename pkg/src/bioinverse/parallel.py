"""Bounded thread-pool fan-out built on anyio.

Model evaluations are CPU-bound numpy/scipy work, so each item runs in a worker
thread and results are gathered by index. The index order makes the outcome
independent of scheduling.
"""

import logging
from typing import Any, Callable, Sequence, TypeVar

import anyio
import anyio.to_thread

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


async def gather_threaded(
    fn: Callable[[T], R],
    items: Sequence[T],
    limit: int,
    return_exceptions: bool = False,
) -> list[Any]:
    """Apply ``fn`` to every item in worker threads.

    Args:
        fn: Callable applied to each item
        items: Inputs, one thread call each
        limit: Maximum number of concurrent calls
        return_exceptions: Return raised exceptions in place instead of raising

    Returns:
        Results in item order

    Raises:
        Exception: The first failure by item index when ``return_exceptions`` is False
    """
    limiter = anyio.CapacityLimiter(max(1, limit))
    results: list[Any] = [None] * len(items)

    async def _worker(index: int, item: T) -> None:
        try:
            results[index] = await anyio.to_thread.run_sync(fn, item, limiter=limiter)
        except Exception as e:
            logger.debug(f"Item {index} failed: {e}")
            results[index] = e

    async with anyio.create_task_group() as tg:
        for index, item in enumerate(items):
            tg.start_soon(_worker, index, item)

    if not return_exceptions:
        for result in results:
            if isinstance(result, Exception):
                raise result
    return results


def map_threaded(
    fn: Callable[[T], R],
    items: Sequence[T],
    max_workers: int = 1,
    return_exceptions: bool = False,
) -> list[Any]:
    """Synchronous front end to :func:`gather_threaded`.

    With ``max_workers <= 1`` the items are processed inline, without an event loop.
    """
    if max_workers <= 1 or len(items) <= 1:
        results: list[Any] = []
        for item in items:
            try:
                results.append(fn(item))
            except Exception as e:
                if not return_exceptions:
                    raise
                results.append(e)
        return results

    return anyio.run(gather_threaded, fn, items, max_workers, return_exceptions)


__all__ = ["gather_threaded", "map_threaded"]
