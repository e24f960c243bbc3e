"""threaded fan-out of independent jobs"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from traceback import format_exception_only
from typing import Any, Callable, Hashable, Mapping

from pyseld.logger import get_modulelogger
from pyseld.types import ErrorHandling
from pyseld.utils.general import max_workers

logger = get_modulelogger(__name__)


def call_threaded(
    func: Callable[..., Any],
    jobs: Mapping[Hashable, Mapping[str, Any]],
    workers: int | None = None,
    errors: ErrorHandling = "raise",
    **kwargs,
) -> dict[Hashable, Any]:
    """helper function to collect callables with threadpool

    Parameters
    ----------
    func : Callable
        Job function, called with the job kwargs and the shared kwargs.
    jobs : Mapping
        Job key mapped to keyword arguments for that job.
    workers : int, default None
        Number of threads, capped by PYSELD_MAX_WORKERS.
    errors : {'ignore', 'warn', 'raise'}, default 'raise'
        Failure policy; 'raise' reraises the first failure in
        submission order, otherwise failed jobs are excluded.

    Return
    ------
    results : dict
        Results keyed and ordered as the jobs mapping."""

    # single thread runs inline
    workers = min(max_workers(workers), max(1, len(jobs)))
    if workers == 1:
        return {key: func(**job, **kwargs) for key, job in jobs.items()}

    results = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            key: executor.submit(func, **job, **kwargs) for key, job in jobs.items()
        }

        # sequential handle of completed futures
        for key, future in futures.items():

            # handle exceptions
            exc = future.exception()
            if exc:

                # propagate first failure
                if errors == "raise":
                    executor.shutdown(wait=True, cancel_futures=True)
                    raise exc

                # report dropped case and log exception
                if errors == "warn":
                    msg = ''.join(format_exception_only(type(exc), exc)).rstrip()
                    logger.warning("Excluded job '%s' from results due to error: '%s'", key, msg)
                    logger.debug("Traceback for job '%s':", key, exc_info=exc)

                continue

            results[key] = future.result()

    return results
