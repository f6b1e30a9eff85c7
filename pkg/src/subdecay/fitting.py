#!/usr/bin/env python3
"""
Log-log power-law fits of decaying series
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .kernels import KernelPair, kernel_rate

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 5


class DecayFit:
    """Least-squares line log y = slope log t + intercept over [t_lo, t_hi]"""

    def __init__(self, t_lo: float, t_hi: float, slope: float, intercept: float,
                 max_residual: float, points: int):
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.slope = slope
        self.intercept = intercept
        self.max_residual = max_residual
        self.points = points

    def to_dict(self) -> Dict[str, Any]:
        return {
            't_lo': self.t_lo,
            't_hi': self.t_hi,
            'slope': self.slope,
            'intercept': self.intercept,
            'max_residual': self.max_residual,
            'points': self.points,
        }

    def __str__(self) -> str:
        return f"slope {self.slope:.4f} on [{self.t_lo:g}, {self.t_hi:g}] ({self.points} points)"


def fit_decay(times: Sequence[float], values: Sequence[float],
              t_lo: Optional[float] = None, t_hi: Optional[float] = None) -> DecayFit:
    """Fit a power law to the samples inside [t_lo, t_hi]

    Args:
        times: Positive sample times
        values: Positive series values
        t_lo: Window start (default: first time)
        t_hi: Window end (default: last time)

    Returns:
        DecayFit with the slope and the largest log residual

    Raises:
        DomainError: fewer than MIN_FIT_POINTS samples or non-positive values in the window
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape:
        raise DomainError("Times and values must have the same length")
    t_lo = float(times.min()) if t_lo is None else t_lo
    t_hi = float(times.max()) if t_hi is None else t_hi
    mask = (times >= t_lo) & (times <= t_hi)
    if np.count_nonzero(mask) < MIN_FIT_POINTS:
        raise DomainError(f"Need at least {MIN_FIT_POINTS} samples in [{t_lo:g}, {t_hi:g}], "
                          f"got {np.count_nonzero(mask)}")
    t, y = times[mask], values[mask]
    if np.any(t <= 0) or np.any(~(y > 0)):
        raise DomainError("Power-law fits need positive times and values")
    x, z = np.log(t), np.log(y)
    slope, intercept = np.polyfit(x, z, 1)
    residual = float(np.max(np.abs(z - (slope * x + intercept))))
    return DecayFit(t_lo, t_hi, float(slope), float(intercept), residual, int(t.size))


def last_decades(times: Sequence[float], decades: float = 2.0) -> Tuple[float, float]:
    """Window covering the last `decades` decades of the sampled times"""
    t_hi = float(np.max(times))
    return max(float(np.min(times)), t_hi * 10.0 ** (-decades)), t_hi


def decay_rate(pair: KernelPair, t_lo: float, t_hi: float, psi: Optional[Any] = None) -> float:
    """rate of the window: slope of (1*l), or of a user rate function psi"""
    if psi is None:
        return kernel_rate(pair, t_lo, t_hi)
    times = np.geomspace(t_lo, t_hi, 21)
    slope, _ = np.polyfit(np.log(times), np.log(np.asarray(psi(times), dtype=float)), 1)
    return float(slope)
