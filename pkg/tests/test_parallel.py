"""Tests for the threaded fan-out helpers."""

import threading
import time

import pytest

from bioinverse.errors import NoIntersection
from bioinverse.parallel import gather_threaded, map_threaded


class ConcurrencyCounter:
    """Records the largest number of simultaneous calls."""

    def __init__(self, delay=0.02):
        self.delay = delay
        self.active = 0
        self.peak = 0
        self.lock = threading.Lock()

    def __call__(self, item):
        with self.lock:
            self.active += 1
            self.peak = max(self.peak, self.active)
        time.sleep(self.delay)
        with self.lock:
            self.active -= 1
        return item * item


def fail_on_odd(item):
    if item % 2:
        raise NoIntersection(item, 1.0)
    return item


class TestGatherThreaded:
    """Test the async fan-out."""

    @pytest.mark.anyio
    async def test_results_in_item_order(self):
        """Test that slower early items do not reorder results."""

        def slow_first(item):
            time.sleep(0.01 * (5 - item))
            return item

        assert await gather_threaded(slow_first, list(range(5)), limit=5) == [0, 1, 2, 3, 4]

    @pytest.mark.anyio
    async def test_limit_caps_concurrency(self):
        """Test that no more than ``limit`` calls run at once."""
        counter = ConcurrencyCounter()
        results = await gather_threaded(counter, list(range(8)), limit=2)
        assert results == [i * i for i in range(8)]
        assert 1 <= counter.peak <= 2

    @pytest.mark.anyio
    async def test_first_failure_by_index(self):
        """Test that the lowest-index failure is raised."""
        with pytest.raises(NoIntersection) as excinfo:
            await gather_threaded(fail_on_odd, [0, 3, 1, 5], limit=4)
        assert excinfo.value.ray_index == 3

    @pytest.mark.anyio
    async def test_return_exceptions(self):
        """Test that failures can be returned in place."""
        results = await gather_threaded(fail_on_odd, [0, 1, 2], limit=3, return_exceptions=True)
        assert results[0] == 0
        assert isinstance(results[1], NoIntersection)
        assert results[2] == 2

    @pytest.mark.anyio
    async def test_empty(self):
        """Test that no items give no results."""
        assert await gather_threaded(fail_on_odd, [], limit=2) == []


class TestMapThreaded:
    """Test the synchronous front end."""

    def test_inline_with_one_worker(self):
        """Test that one worker runs everything on the calling thread."""
        caller = threading.get_ident()
        assert map_threaded(lambda _: threading.get_ident(), [1, 2, 3]) == [caller] * 3

    def test_workers_match_inline(self):
        """Test that threading does not change results."""
        items = list(range(10))
        assert map_threaded(ConcurrencyCounter(0.0), items, max_workers=4) == map_threaded(
            ConcurrencyCounter(0.0), items
        )

    def test_inline_failure_propagates(self):
        """Test that the first failure is raised inline."""
        with pytest.raises(NoIntersection):
            map_threaded(fail_on_odd, [0, 1, 2])

    @pytest.mark.parametrize("workers", [1, 3])
    def test_return_exceptions(self, workers):
        """Test returning failures in place with and without threads."""
        results = map_threaded(fail_on_odd, [0, 1, 2], max_workers=workers, return_exceptions=True)
        assert results[0] == 0
        assert isinstance(results[1], NoIntersection)
        assert results[2] == 2
