#!/usr/bin/env python3
"""
Progress tracking utilities for subdecay

This handles terminal progress bars for long sweeps and the ordered
thread-pool map used to evaluate independent sample times.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, Iterable, List, Optional, Sequence, TypeVar, Union

# tqdm is optional; without it progress goes to the log
try:
    from tqdm import tqdm
    TQDM_AVAILABLE = True
except ImportError:
    TQDM_AVAILABLE = False

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class OperationType(Enum):
    """Sweeps that report progress"""
    RELAXATION = "relaxation"
    PROFILE = "profile"
    DECAY_SWEEP = "decay_sweep"
    ENERGY = "energy"
    BOUNDS = "bounds"


class ProgressTracker:
    """Progress of a sweep over sample times, radii or seeds"""

    def __init__(self,
                 operation_type: Union[str, OperationType],
                 total: int = 0,
                 desc: str = "",
                 unit: str = "items",
                 enabled: bool = True):
        """Create a tracker; nothing is shown until start()

        Args:
            operation_type: Type of operation being tracked
            total: Total number of items to process
            desc: Label shown next to the bar
            unit: Unit of items being processed (times, columns, radii, ...)
            enabled: Whether anything is displayed at all
        """
        self.operation_type = operation_type.value if isinstance(operation_type, OperationType) else operation_type
        self.total = total
        self.desc = desc or f"Processing {self.operation_type}"
        self.unit = unit
        self.enabled = enabled
        self.current = 0
        self.active = False
        self.pbar = None

    def start(self) -> 'ProgressTracker':
        """Open the bar (or log the first line)"""
        self.active = True
        if not self.enabled:
            return self

        if TQDM_AVAILABLE:
            self.pbar = tqdm(
                total=self.total or None,
                desc=self.desc,
                unit=self.unit,
                leave=False,
            )
        else:
            logger.info(f"{self.desc} (0/{self.total} {self.unit})")
        return self

    def update(self, n: int = 1, status: str = "") -> None:
        """Advance by n finished items, optionally with a status suffix"""
        if not self.active:
            return
        self.current += n
        if self.pbar is not None:
            self.pbar.update(n)
            if status:
                self.pbar.set_postfix_str(status)
        elif self.enabled and status:
            logger.debug(f"{self.desc}: {status} ({self.current}/{self.total})")

    def close(self, status: str = "Complete") -> None:
        """Close the bar and log the final count"""
        if not self.active:
            return
        self.active = False
        if self.pbar is not None:
            self.pbar.close()
            self.pbar = None
        if self.enabled:
            logger.info(f"{self.desc}: {status} ({self.current}/{self.total} {self.unit})")

    def __enter__(self) -> 'ProgressTracker':
        return self.start()

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close("Failed" if exc_type else "Complete")


def parallel_map(func: Callable[[T], R],
                 items: Sequence[T],
                 threads: int = 1,
                 tracker: Optional[ProgressTracker] = None) -> List[R]:
    """Apply func to every item, returning results in input order

    Args:
        func: Pure function evaluated once per item
        items: Work items (e.g. sample times)
        threads: Worker threads; 1 runs serially in the calling thread
        tracker: Optional progress tracker updated once per finished item

    Returns:
        List of results aligned with items
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        results = []
        for item in items:
            results.append(func(item))
            if tracker is not None:
                tracker.update(1)
        return results

    results: List[Any] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(func, item) for item in items]
        # results[i] always belongs to items[i]
        for index, future in enumerate(futures):
            results[index] = future.result()
            if tracker is not None:
                tracker.update(1)
    return results
