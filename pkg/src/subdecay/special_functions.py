#!/usr/bin/env python3
"""
Special functions used throughout subdecay

Gamma, the Mittag-Leffler function on the negative axis, the exponential
integral and Bessel functions.  Every function accepts a scalar or a numpy
array and returns the same shape (a float for scalar input).
"""

import logging
import math
from functools import lru_cache
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .reports import ClaimReport

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061

# Validated range of bessel_j
BESSEL_MAX_ARGUMENT = 1e4
BESSEL_MAX_ORDER = 5.0
_range_warning_issued = False


def _as_array(x: Any) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool) -> Any:
    if scalar:
        return float(np.reshape(values, -1)[0])
    return values


def gamma(x: Any) -> Any:
    """Gamma function for positive arguments"""
    arr, scalar = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError(f"gamma requires x > 0, got {x}")
    return _restore(special.gamma(arr), scalar)


class MittagLefflerParams:
    """Regime boundaries and term counts for E_alpha(-x)"""

    def __init__(self, alpha: float, series_cutoff: float = 1.0, asymptotic_cutoff: float = 50.0,
                 series_terms: int = 320, asymptotic_terms: int = 12, table_points: int = 801):
        if not 0 < alpha <= 1:
            raise DomainError(f"Mittag-Leffler order must lie in (0, 1], got {alpha}")
        if not 0 < series_cutoff < asymptotic_cutoff:
            raise DomainError(
                f"Need 0 < series_cutoff < asymptotic_cutoff, got {series_cutoff}, {asymptotic_cutoff}")
        if series_terms < 1 or asymptotic_terms < 1 or table_points < 8:
            raise DomainError("Term and table counts must be positive")
        self.alpha = float(alpha)
        self.series_cutoff = float(series_cutoff)
        self.asymptotic_cutoff = float(asymptotic_cutoff)
        self.series_terms = int(series_terms)
        self.asymptotic_terms = int(asymptotic_terms)
        self.table_points = int(table_points)

    def to_dict(self):
        return {
            'alpha': self.alpha,
            'series_cutoff': self.series_cutoff,
            'asymptotic_cutoff': self.asymptotic_cutoff,
            'series_terms': self.series_terms,
            'asymptotic_terms': self.asymptotic_terms,
            'table_points': self.table_points,
        }


def _ml_series(alpha: float, x: np.ndarray, terms: int) -> np.ndarray:
    # Horner evaluation of sum_k (-x)^k / Gamma(alpha k + 1); |x| <= 1 keeps it stable
    coefficients = special.rgamma(alpha * np.arange(terms) + 1.0)
    return np.polynomial.polynomial.polyval(-x, coefficients)


def _ml_asymptotic(alpha: float, x: np.ndarray, terms: int) -> np.ndarray:
    # sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(1 - alpha k)
    k = np.arange(terms + 1)
    coefficients = special.rgamma(1.0 - alpha * k)
    coefficients[0] = 0.0
    return -np.polynomial.polynomial.polyval(-1.0 / x, coefficients)


def _ml_spectral_integral(alpha: float, x: float) -> float:
    """E_alpha(-x) from the completely monotone spectral density, folded onto [0, 1]"""
    c = math.cos(alpha * math.pi)
    inv_alpha = 1.0 / alpha

    def integrand(u: float) -> float:
        denominator = u * u + 2.0 * u * c + 1.0
        near = math.exp(-(x * u) ** inv_alpha)
        if u <= 0:
            return near / denominator
        exponent = inv_alpha * math.log(x / u)
        far = math.exp(-math.exp(exponent)) if exponent < 700.0 else 0.0
        return (near + far) / denominator

    value, _ = quad(integrand, 0.0, 1.0, points=[min(0.5, 1.0 / x)],
                    epsabs=1e-15, epsrel=1e-12, limit=200)
    return math.sin(alpha * math.pi) / (math.pi * alpha) * value


@lru_cache(maxsize=64)
def _ml_middle_table(alpha: float, lower: float, upper: float, points: int) -> CubicSpline:
    log_x = np.linspace(math.log(lower), math.log(upper), points)
    values = np.array([_ml_spectral_integral(alpha, math.exp(v)) for v in log_x])
    logger.debug(f"Built Mittag-Leffler table for alpha={alpha} on [{lower}, {upper}] with {points} nodes")
    return CubicSpline(log_x, np.log(values))


def mittag_leffler_neg(alpha: float, x: Any, params: Optional[MittagLefflerParams] = None) -> Any:
    """Mittag-Leffler function E_alpha(-x) for 0 < alpha <= 1 and x >= 0

    Power series for x <= 1, the spectral-density integral representation
    (tabulated once per alpha and spline-interpolated in log-log) for
    1 < x < 50, and the algebraic asymptotic expansion for x >= 50.

    Args:
        alpha: Order in (0, 1]
        x: Nonnegative argument(s)
        params: Optional regime configuration

    Returns:
        E_alpha(-x) with the shape of x
    """
    if params is None:
        params = MittagLefflerParams(alpha)
    elif params.alpha != alpha:
        raise DomainError(f"Parameter set is for alpha={params.alpha}, not {alpha}")
    if not 0 < alpha <= 1:
        raise DomainError(f"Mittag-Leffler order must lie in (0, 1], got {alpha}")

    arr, scalar = _as_array(x)
    if np.any(~(arr >= 0)):
        raise DomainError("mittag_leffler_neg requires x >= 0")
    if alpha == 1.0:
        return _restore(np.exp(-arr), scalar)

    out = np.empty_like(arr)
    small = arr <= params.series_cutoff
    large = arr >= params.asymptotic_cutoff
    middle = ~(small | large)

    if np.any(small):
        out[small] = _ml_series(alpha, arr[small], params.series_terms)
    if np.any(large):
        out[large] = _ml_asymptotic(alpha, arr[large], params.asymptotic_terms)
    if np.any(middle):
        spline = _ml_middle_table(alpha, params.series_cutoff, params.asymptotic_cutoff,
                                  params.table_points)
        out[middle] = np.exp(spline(np.log(arr[middle])))
    return _restore(out, scalar)


def mittag_leffler_envelope(alpha: float, x: Any) -> Tuple[Any, Any]:
    """Lower and upper envelope 1/(1+Gamma(1-alpha)x) and 1/(1+x/Gamma(1+alpha))"""
    if not 0 < alpha < 1:
        raise DomainError(f"Envelope needs alpha in (0, 1), got {alpha}")
    arr, scalar = _as_array(x)
    lower = 1.0 / (1.0 + special.gamma(1.0 - alpha) * arr)
    upper = 1.0 / (1.0 + arr / special.gamma(1.0 + alpha))
    return _restore(lower, scalar), _restore(upper, scalar)


def mittag_leffler_envelope_check(alphas: Sequence[float], x: Sequence[float],
                                  slack: float = 1e-10) -> ClaimReport:
    """Count points where E_alpha(-x) leaves its envelope, for every alpha"""
    x = np.asarray(x, dtype=float)
    violations = {}
    for alpha in alphas:
        values = mittag_leffler_neg(alpha, x)
        lower, upper = mittag_leffler_envelope(alpha, x)
        count = np.sum(values < lower * (1.0 - slack)) + np.sum(values > upper * (1.0 + slack))
        violations[f"{alpha:g}"] = int(count)
    total = sum(violations.values())
    return ClaimReport("ml-envelope", total == 0, {'violations': violations, 'points': int(x.size)},
                       target=0, tolerance=slack).log()


def mittag_leffler_upper_constant(alpha: float, x_grid: Optional[np.ndarray] = None) -> float:
    """Empirical C(alpha) = max (1+x) E_alpha(-x) over a log grid"""
    if x_grid is None:
        x_grid = np.concatenate(([0.0], np.geomspace(1e-6, 1e6, 2000)))
    values = mittag_leffler_neg(alpha, x_grid)
    return float(np.max((1.0 + x_grid) * values))


def exp_integral_e1(x: Any) -> Any:
    """Exponential integral E1(x) for x > 0"""
    arr, scalar = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x}")
    return _restore(special.exp1(arr), scalar)


def scaled_exp_integral(x: Any) -> Any:
    """e^x E1(x) for x > 0, free of overflow for large x"""
    arr, scalar = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError(f"scaled_exp_integral requires x > 0, got {x}")
    out = np.empty_like(arr)
    moderate = arr < 50.0
    out[moderate] = np.exp(arr[moderate]) * special.exp1(arr[moderate])
    if np.any(~moderate):
        # asymptotic series sum_n (-1)^n n! / x^(n+1)
        y = 1.0 / arr[~moderate]
        n = np.arange(26)
        coefficients = (-1.0) ** n * special.factorial(n)
        out[~moderate] = y * np.polynomial.polynomial.polyval(y, coefficients)
    return _restore(out, scalar)


def bessel_j(nu: float, x: Any) -> Any:
    """Bessel function of the first kind J_nu(x) for nu >= 0, x >= 0"""
    if nu < 0:
        raise DomainError(f"bessel_j requires nu >= 0, got {nu}")
    arr, scalar = _as_array(x)
    if np.any(~(arr >= 0)):
        raise DomainError("bessel_j requires x >= 0")
    global _range_warning_issued
    if not _range_warning_issued and (nu > BESSEL_MAX_ORDER or (arr.size and np.max(arr) > BESSEL_MAX_ARGUMENT)):
        _range_warning_issued = True
        logger.warning(f"bessel_j evaluated outside its validated range (nu={nu}, max x={np.max(arr):.3g})")
    return _restore(special.jv(nu, arr), scalar)


def radial_bessel(d: int, x: Any) -> Any:
    """Normalized radial kernel J_nu(x)/x^nu with nu = d/2 - 1

    This is the kernel of the d-dimensional radial Fourier inversion; for
    d = 1 it reduces to sqrt(2/pi) cos(x).
    """
    if d < 1:
        raise DomainError(f"Dimension must be >= 1, got {d}")
    arr, scalar = _as_array(x)
    if d == 1:
        return _restore(math.sqrt(2.0 / math.pi) * np.cos(arr), scalar)

    nu = d / 2.0 - 1.0
    out = np.empty_like(arr)
    tiny = np.abs(arr) < 1e-6
    origin = 1.0 / (2.0 ** nu * special.gamma(nu + 1.0))
    out[tiny] = origin * (1.0 - arr[tiny] ** 2 / (4.0 * (nu + 1.0)))
    regular = ~tiny
    if nu == 0:
        out[regular] = bessel_j(0.0, arr[regular])
    else:
        out[regular] = bessel_j(nu, arr[regular]) / arr[regular] ** nu
    return _restore(out, scalar)
