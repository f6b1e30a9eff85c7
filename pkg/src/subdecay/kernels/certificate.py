#!/usr/bin/env python3
"""
Numerical certificates for condition (PC)
"""

import logging
import warnings
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .base import KernelPair
from ..errors import DomainError
from ..utils.config import config
from ..utils.progress import ProgressTracker, OperationType, parallel_map

logger = logging.getLogger(__name__)

# Relative slack when comparing consecutive k samples
_MONOTONE_SLACK = 1e-12

# Below this fraction of t the differences l(t-s) - l(t) and k(t-s) - k(t) are rounding only
_DIFFERENCE_FLOOR = 1e-14


class PairCertificate:
    """Outcome of verify_pair"""

    def __init__(self, pair_name: str, max_deviation: float, worst_time: float, tolerance: float,
                 monotonicity_violations: int, sign_violations: int, quadrature_warnings: int,
                 samples: int):
        self.pair_name = pair_name
        self.max_deviation = max_deviation
        self.worst_time = worst_time
        self.tolerance = tolerance
        self.monotonicity_violations = monotonicity_violations
        self.sign_violations = sign_violations
        self.quadrature_warnings = quadrature_warnings
        self.samples = samples

    @property
    def passed(self) -> bool:
        return (self.max_deviation <= self.tolerance
                and self.monotonicity_violations == 0
                and self.sign_violations == 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'claim': 'pc-certificate',
            'pair': self.pair_name,
            'passed': self.passed,
            'max_deviation': self.max_deviation,
            'worst_time': self.worst_time,
            'tolerance': self.tolerance,
            'monotonicity_violations': self.monotonicity_violations,
            'sign_violations': self.sign_violations,
            'quadrature_warnings': self.quadrature_warnings,
            'samples': self.samples,
        }


def convolve_k_l(pair: KernelPair, t: float) -> Tuple[float, bool]:
    """(k*l)(t) by adaptive quadrature

    The integral is split at t/2 and each half is written in the variable in
    which its singular kernel sits at the origin, so neither k nor l is ever
    evaluated at t - s for small s.  The value of the smooth factor at t is
    peeled off against the closed-form cumulatives:

        (k*l)(t) = l(t) (1*k)(t/2) + int_0^{t/2} k(s) [l(t-s) - l(t)] ds
                 + k(t) (1*l)(t/2) + int_0^{t/2} l(s) [k(t-s) - k(t)] ds

    which leaves bounded integrands even for kernels like 1/(s log^2 s).

    Returns:
        Tuple of (value, whether quad emitted a warning)
    """
    half = 0.5 * t
    k_t = float(pair.k(np.array([t]))[0])
    l_t = float(pair.l(np.array([t]))[0])
    floor = _DIFFERENCE_FLOOR * t

    def near_k(s: float) -> float:
        if s < floor:
            return 0.0
        return float(pair.k(np.array([s]))[0] * (pair.l(np.array([t - s]))[0] - l_t))

    def near_l(s: float) -> float:
        if s < floor:
            return 0.0
        return float(pair.l(np.array([s]))[0] * (pair.k(np.array([t - s]))[0] - k_t))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        k_side, _ = quad(near_k, 0.0, half, limit=500, epsrel=1e-10, epsabs=1e-13)
        l_side, _ = quad(near_l, 0.0, half, limit=500, epsrel=1e-10, epsabs=1e-13)
    value = (l_t * float(pair.cumulative_k(np.array([half]))[0]) + k_side
             + k_t * float(pair.cumulative_l(np.array([half]))[0]) + l_side)
    if pair.k_atom:
        value += pair.k_atom * l_t
    return value, bool(caught)


def verify_pair(pair: KernelPair,
                grid: Sequence[float],
                tolerance: Optional[float] = None,
                threads: int = 1) -> PairCertificate:
    """Certify that (k, l) is a PC pair on a time grid

    Args:
        pair: Kernel pair
        grid: Strictly increasing times, starting near 0
        tolerance: Allowed |(k*l)(t) - 1|; defaults to the configured pair tolerance
        threads: Worker threads for the per-time convolutions

    Returns:
        PairCertificate; failures are reported, never raised
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise DomainError("verify_pair needs a strictly increasing nonnegative grid")
    if tolerance is None:
        tolerance = config.get_tolerance("closed_form_pair" if pair.closed_form else "pair_certificate")

    interior = grid[grid > 0]
    pair.check_range(interior)

    k_values = pair.k(interior)
    l_values = pair.l(interior)
    monotone = int(np.sum(k_values[1:] > k_values[:-1] * (1.0 + _MONOTONE_SLACK) + 1e-300))
    signs = int(np.sum(k_values < 0) + np.sum(l_values < 0))

    with ProgressTracker(OperationType.BOUNDS, total=interior.size,
                         desc=f"Certifying {pair.name}", unit="times",
                         enabled=interior.size > 64) as tracker:
        results = parallel_map(lambda t: convolve_k_l(pair, t), list(interior), threads, tracker)

    values = np.array([r[0] for r in results])
    flagged = sum(1 for r in results if r[1])
    deviations = np.abs(values - 1.0)
    worst = int(np.argmax(deviations))

    certificate = PairCertificate(pair.name, float(deviations[worst]), float(interior[worst]),
                                  float(tolerance), monotone, signs, flagged, int(interior.size))
    if certificate.passed:
        logger.info(f"{pair.name}: PC certificate passed (max deviation {certificate.max_deviation:.3g})")
    else:
        logger.warning(f"{pair.name}: PC certificate failed (max deviation {certificate.max_deviation:.3g} "
                       f"at t={certificate.worst_time:.6g}, {monotone} monotonicity and {signs} sign violations)")
    return certificate


def ultraslow_log_threshold(pair: KernelPair, t_grid: Sequence[float],
                            assert_from: float = 10.0) -> Dict[str, Any]:
    """Smallest grid time T1 >= 1 beyond which log t <= 2 (1*l)(t)

    Returns:
        Dict with the threshold (None when the inequality fails at the last
        grid point) and whether it holds for every grid t >= assert_from
    """
    t_grid = np.asarray(t_grid, dtype=float)
    t_grid = t_grid[t_grid >= 1.0]
    if t_grid.size == 0:
        raise DomainError("Log threshold needs grid points t >= 1")
    holds = np.log(t_grid) <= 2.0 * pair.cumulative_l(t_grid)

    threshold = None
    failing = np.nonzero(~holds)[0]
    if failing.size == 0:
        threshold = float(t_grid[0])
    elif failing[-1] + 1 < t_grid.size:
        threshold = float(t_grid[failing[-1] + 1])

    tail = t_grid >= assert_from
    return {
        'claim': 'log-threshold',
        'pair': pair.name,
        'threshold': threshold,
        'assert_from': assert_from,
        'passed': bool(np.all(holds[tail])),
    }
