#!/usr/bin/env python3
"""
Time grids and quadrature rules shared by the solvers
"""

import logging
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import gamma

from ..errors import DomainError

logger = logging.getLogger(__name__)


def graded_grid(t_max: float, n: int, grade: float = 2.0) -> np.ndarray:
    """Graded mesh t_i = T (i/(n-1))^grade with n points, t_0 = 0

    Args:
        t_max: Final time T
        n: Number of grid points including t = 0
        grade: Grading exponent (1 gives a uniform mesh)

    Returns:
        Strictly increasing array starting at 0 and ending at t_max
    """
    if t_max <= 0:
        raise DomainError(f"Graded grid needs a positive end time, got {t_max}")
    if n < 2:
        raise DomainError(f"Graded grid needs at least two points, got {n}")
    if grade < 1:
        raise DomainError(f"Grading exponent must be >= 1, got {grade}")
    return t_max * (np.arange(n) / (n - 1)) ** grade


def log_graded_grid(t_min: float, t_max: float, n: int) -> np.ndarray:
    """Mesh {0} followed by n-1 geometrically spaced points in [t_min, t_max]"""
    if not 0 < t_min < t_max:
        raise DomainError(f"Need 0 < t_min < t_max, got {t_min}, {t_max}")
    if n < 3:
        raise DomainError(f"Log-graded grid needs at least three points, got {n}")
    return np.concatenate(([0.0], np.geomspace(t_min, t_max, n - 1)))


def log_spaced(t_lo: float, t_hi: float, count: int) -> np.ndarray:
    """Sampling times for sweeps, log-spaced and inclusive"""
    if not 0 < t_lo <= t_hi:
        raise DomainError(f"Need 0 < t_lo <= t_hi, got {t_lo}, {t_hi}")
    if count < 1:
        raise DomainError(f"Need at least one sample time, got {count}")
    if count == 1:
        return np.array([float(t_lo)])
    return np.geomspace(t_lo, t_hi, count)


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]"""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_gauss_legendre(breakpoints: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive breakpoint panels

    Args:
        breakpoints: Increasing panel boundaries
        n: Nodes per panel

    Returns:
        Tuple of (nodes, weights), both flat arrays
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if breakpoints.ndim != 1 or breakpoints.size < 2:
        raise DomainError("Composite rule needs at least two breakpoints")
    widths = np.diff(breakpoints)
    if np.any(widths <= 0):
        raise DomainError("Breakpoints must be strictly increasing")
    x, w = gauss_legendre(n)
    nodes = breakpoints[:-1, None] + widths[:, None] * x[None, :]
    weights = widths[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def geometric_breakpoints(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Geometric panel boundaries covering [lo, hi] with per_decade panels per decade"""
    if not 0 < lo < hi:
        raise DomainError(f"Need 0 < lo < hi, got {lo}, {hi}")
    decades = np.log10(hi / lo)
    count = max(1, int(np.ceil(decades * per_decade)))
    return np.geomspace(lo, hi, count + 1)


def unit_sphere_area(d: int) -> float:
    """Surface area omega_{d-1} of the unit sphere in R^d"""
    return 2.0 * np.pi ** (d / 2.0) / gamma(d / 2.0)


def unit_ball_volume(d: int) -> float:
    """Volume V_d of the unit ball in R^d"""
    return np.pi ** (d / 2.0) / gamma(d / 2.0 + 1.0)
