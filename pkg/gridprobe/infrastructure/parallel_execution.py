"""Infrastructure implementation for bounded parallel execution."""

import logging
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from typing import Any, Callable, List, Optional

from ..domain.interfaces import ParallelExecutor

log = logging.getLogger(__name__)


class ThreadBasedExecutor(ParallelExecutor):
    """Thread pool executor; the pool size bounds the number of tasks in flight."""

    def execute_parallel(self, tasks: List[Callable[[], Any]], max_workers: Optional[int] = None) -> List[Any]:
        """Execute tasks in parallel and return results in task order.

        The first task exception cancels everything not yet started and is
        re-raised once the running tasks have finished.
        """
        if not tasks:
            return []

        if max_workers is None or max_workers < 1:
            max_workers = 1

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = [executor.submit(task) for task in tasks]
            done, _ = wait(futures, return_when=FIRST_EXCEPTION)
            failed = next((f for f in futures if f in done and f.exception() is not None), None)
            if failed is not None:
                for future in futures:
                    future.cancel()
                log.error("task failed: %s", failed.exception())
                raise failed.exception()
            return [future.result() for future in futures]


class SequentialExecutor(ParallelExecutor):
    """Sequential executor for debugging or single-threaded execution."""

    def execute_parallel(self, tasks: List[Callable[[], Any]], max_workers: Optional[int] = None) -> List[Any]:
        return [task() for task in tasks]


def executor_for(parallelism: int) -> ParallelExecutor:
    return ThreadBasedExecutor() if parallelism > 1 else SequentialExecutor()
