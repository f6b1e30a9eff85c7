#!/usr/bin/env python3
"""
Base kernel pair abstract class and evaluation entry points

A kernel pair (k, l) is of type PC when k is nonnegative, nonincreasing and
locally integrable and k * l = 1 on (0, inf).  Pairs evaluate on numpy
arrays and are immutable after construction, so they can be shared freely
between worker threads.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from ..errors import DomainError, ExtrapolationError

logger = logging.getLogger(__name__)


class KernelPair(ABC):
    """Base class for all PC kernel pairs"""

    # Pairs whose k, l and (1*l) come from exact formulas
    closed_form = False

    def __init__(self, name: str):
        self.name = name

    @property
    def k_atom(self) -> float:
        """Weight of a point mass of k at t = 0 (zero for genuine functions)"""
        return 0.0

    def time_range(self) -> Tuple[float, float]:
        """Interval of t on which the pair can be evaluated"""
        return 0.0, np.inf

    @abstractmethod
    def k(self, t: np.ndarray) -> np.ndarray:
        """Absolutely continuous part of k at t > 0"""
        pass

    @abstractmethod
    def l(self, t: np.ndarray) -> np.ndarray:
        """Resolvent kernel l at t > 0"""
        pass

    @abstractmethod
    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        """(1*k)(t) for t >= 0, without the point mass"""
        pass

    @abstractmethod
    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        """(1*l)(t) for t >= 0"""
        pass

    @abstractmethod
    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        """(1*1*l)(t) for t >= 0"""
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Convert to a pair spec for serialization"""
        pass

    def relaxation(self, t: float, mu: np.ndarray) -> Optional[np.ndarray]:
        """Closed-form s(t, mu), or None when it has to be solved for"""
        return None

    def check_range(self, t: np.ndarray) -> None:
        lower, upper = self.time_range()
        if t.size and (np.min(t) < lower or np.max(t) > upper):
            bad = float(np.min(t)) if np.min(t) < lower else float(np.max(t))
            raise ExtrapolationError(
                f"{self.name}: t={bad:.6g} outside the tabulated range [{lower:.6g}, {upper:.6g}]",
                bad, lower, upper)

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_dict()})"


def _positive_times(t: Any) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0)):
        raise DomainError(f"Kernel evaluation needs t > 0, got min t = {np.min(arr)}")
    return arr, scalar


def _restore(values: np.ndarray, scalar: bool) -> Any:
    return float(values[0]) if scalar else values


def eval_k(pair: KernelPair, t: Any) -> Any:
    """Evaluate k(t) for t > 0

    Args:
        pair: Kernel pair
        t: Positive time(s)

    Returns:
        k(t), a float for scalar input
    """
    arr, scalar = _positive_times(t)
    pair.check_range(arr)
    return _restore(pair.k(arr), scalar)


def eval_l(pair: KernelPair, t: Any) -> Any:
    """Evaluate l(t) for t > 0"""
    arr, scalar = _positive_times(t)
    pair.check_range(arr)
    return _restore(pair.l(arr), scalar)


def eval_cumulative_l(pair: KernelPair, t: Any) -> Any:
    """Evaluate (1*l)(t) for t >= 0"""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr >= 0)):
        raise DomainError(f"(1*l)(t) needs t >= 0, got min t = {np.min(arr)}")
    pair.check_range(arr[arr > 0])
    return _restore(pair.cumulative_l(arr), scalar)


def kernel_rate(pair: KernelPair, t_lo: float, t_hi: float, count: int = 21) -> float:
    """Fitted log-log slope of (1*l) over [t_lo, t_hi]

    This is the rate(L) that the decay targets of general pairs are scaled with.
    """
    if not 0 < t_lo < t_hi:
        raise DomainError(f"Need 0 < t_lo < t_hi, got {t_lo}, {t_hi}")
    times = np.geomspace(t_lo, t_hi, count)
    values = eval_cumulative_l(pair, times)
    slope, _ = np.polyfit(np.log(times), np.log(values), 1)
    return float(slope)
