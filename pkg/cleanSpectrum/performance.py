#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Performance monitoring and progress tracking utilities.
Provides tools for measuring generation and evaluation runs and displaying progress.
"""

import functools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from typing import Any, Callable, Optional, TypeVar
from collections.abc import Iterator, Sequence

from tqdm import tqdm

# Configure logger
logger = logging.getLogger(__name__)

# Type variables for generic function types
T = TypeVar('T')
R = TypeVar('R')


class PerformanceMetrics:
    """
    Track and report throughput of record generation and evaluation.
    """

    def __init__(self):
        """Initialize performance metrics tracking."""
        self.start_time: Optional[datetime] = None
        self.end_time: Optional[datetime] = None
        self.total_time = 0.0

        self.records_produced = 0
        self.records_per_second = 0.0
        self.redraws = 0

        # Failures by error type
        self.errors_by_type: dict[str, int] = {}

    def start(self) -> None:
        """Mark the start of performance measurement."""
        self.start_time = datetime.now()

    def end(self) -> None:
        """Mark the end of performance measurement."""
        self.end_time = datetime.now()
        if self.start_time and self.end_time:
            self.total_time = (self.end_time - self.start_time).total_seconds()
            if self.records_produced > 0 and self.total_time > 0:
                self.records_per_second = self.records_produced / self.total_time

    def record_records(self, count: int) -> None:
        self.records_produced += count

    def record_redraw(self, error_type: str) -> None:
        """
        Record a redraw caused by an error.

        Args:
            error_type: Name of the error that forced the redraw
        """
        self.redraws += 1
        self.errors_by_type[error_type] = self.errors_by_type.get(error_type, 0) + 1

    def get_summary(self) -> dict[str, Any]:
        """
        Get a summary of performance metrics.

        Returns:
            Dictionary with performance metrics
        """
        return {
            "time": {
                "total_seconds": self.total_time,
                "start": self.start_time.isoformat() if self.start_time else None,
                "end": self.end_time.isoformat() if self.end_time else None,
            },
            "throughput": {
                "records_produced": self.records_produced,
                "records_per_second": self.records_per_second,
            },
            "redraws": self.redraws,
            "errors": dict(self.errors_by_type),
        }

    def log_summary(self, level: int = logging.INFO) -> None:
        """
        Log a summary of performance metrics.

        Args:
            level: Logging level to use
        """
        if not self.start_time or not self.end_time:
            logger.warning("Performance metrics not started or ended properly")
            return

        logger.log(level, "Performance Summary:")
        logger.log(level, "-------------------")
        logger.log(level, "Total time: %s", str(self.end_time - self.start_time))
        if self.records_produced > 0:
            logger.log(level, "Throughput: %d records in %.2fs (%.2f records/sec)",
                       self.records_produced, self.total_time, self.records_per_second)
        if self.redraws > 0:
            logger.log(level, "Redraws: %d", self.redraws)
            for error_type, count in self.errors_by_type.items():
                logger.log(level, "  %s: %d", error_type, count)


def timed_function(func: Callable[..., T]) -> Callable[..., T]:
    """
    Decorator to measure and log function execution time.

    Args:
        func: The function to time

    Returns:
        Wrapped function that logs execution time
    """
    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> T:
        start_time = time.time()
        try:
            return func(*args, **kwargs)
        finally:
            duration = time.time() - start_time
            logger.debug("%s execution time: %.4f seconds", func.__name__, duration)
    return wrapper


def iter_with_progress(
    items: Sequence[T],
    process_func: Callable[[T], R],
    workers: int = 1,
    description: str = "Processing",
    unit: str = "item",
    show_progress: bool = True,
    chunksize: int = 1,
) -> Iterator[R]:
    """
    Map process_func over items, yielding results in input order.

    With workers > 1 the calls run in a process pool; process_func and the
    items must be picklable. Results are still yielded in index order so a
    single consumer can write them sequentially.

    Args:
        items: Items to process
        process_func: Function applied to each item
        workers: Number of worker processes (1 runs inline)
        description: Description for the progress bar
        unit: Unit name for the progress bar
        show_progress: Whether to display a progress bar
        chunksize: Items sent to a worker at a time

    Yields:
        Results in the same order as the input items
    """
    if not items:
        return

    with tqdm(total=len(items), desc=description, unit=unit, disable=not show_progress) as bar:
        if workers <= 1:
            for item in items:
                yield process_func(item)
                bar.update(1)
            return

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(process_func, items, chunksize=chunksize):
                yield result
                bar.update(1)
