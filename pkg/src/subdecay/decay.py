#!/usr/bin/env python3
"""
Decay exponents of solution norms and the critical-dimension phenomenon

A sweep evaluates one norm of u(t) = Z(t) * u0 over sample times, fits a
power law over a window and compares it with the target exponent.  Below
the critical dimension 2r/(r-1) the L_r norm decays like
(1*l)(t)^(-(d/2)(1 - 1/r)); at and above it the decay saturates at
(1*l)(t)^-1 and the weak L_r norm is the sharp one.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, HypothesisError, ProfileError
from .field import (
    Datum, GaussianDatum, GridField, RadialSpectrum, box_extent, datum_radii, evolve, evolve_radial, gradient_field,
    gradient_l2_norm_radial, l2_norm_plancherel_radial, lp_norm, weak_lp_quasinorm,
)
from .fitting import DecayFit, decay_rate, fit_decay, last_decades
from .fundsol import Z_BOX_FACTOR, critical_exponent, z_grid_fft
from .kernels import FractionalPair, KernelPair, eval_cumulative_l, eval_k
from .radial import HankelQuadrature, RadialProfile, bessel_potential, radial_lp_norm, radial_weak_lp_quasinorm
from .relaxation import symbol_for
from .reports import ClaimReport
from .utils.artifacts import write_csv
from .utils.config import config
from .utils.progress import OperationType, ProgressTracker, parallel_map

logger = logging.getLogger(__name__)

Symbol = Callable[[float, np.ndarray], np.ndarray]

# Largest last-decade slope change still counted as a power law
STABILITY_THRESHOLD = 0.05

# Largest B/b of the logarithmic band
LOG_BAND_RATIO = 4.0


def fit_decay_exponent(times: Sequence[float], values: Sequence[float],
                       window: Optional[Tuple[float, float]] = None) -> DecayFit:
    """Least-squares slope of log value against log t over the window"""
    t_lo, t_hi = window if window is not None else (None, None)
    return fit_decay(times, values, t_lo, t_hi)


def critical_dimension(r: float) -> float:
    """d_crit = 2r/(r-1), where the L_r decay of u saturates"""
    if not r > 1:
        raise DomainError(f"Critical dimension needs r > 1, got {r}")
    if math.isinf(r):
        return 2.0
    return 2.0 * r / (r - 1.0)


def gradient_critical_dimension(r: float) -> float:
    """r/(r-1), where the L_r decay of grad u saturates"""
    if not r > 1:
        raise DomainError(f"Critical dimension needs r > 1, got {r}")
    if math.isinf(r):
        return 1.0
    return r / (r - 1.0)


def decay_target(d: int, r: float, rate: float, gradient: bool = False) -> float:
    """Target slope of |u(t)|_r (or |grad u(t)|_r) for a window with the given rate"""
    spread = 0.5 * d * (1.0 - 1.0 / r)
    if gradient:
        if d < gradient_critical_dimension(r):
            return -rate * (0.5 + spread)
        return -rate
    if d < critical_dimension(r):
        return -rate * spread
    return -rate


class DecaySeries:
    """A norm sampled at increasing times"""

    def __init__(self, label: str, times: Sequence[float], values: Sequence[float]):
        self.label = label
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)

    def write_csv(self, path: str) -> str:
        """Export as `t,norm`"""
        return write_csv(path, ["t", "norm"], zip(self.times, self.values))

    def to_dict(self) -> Dict[str, Any]:
        return {'label': self.label, 'times': self.times, 'values': self.values}


class SweepResult:
    """Series, fits and claim reports of one sweep"""

    def __init__(self):
        self.series: Dict[str, DecaySeries] = {}
        self.fits: Dict[str, DecayFit] = {}
        self.reports: List[ClaimReport] = []

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'fits': {label: fit.to_dict() for label, fit in self.fits.items()},
            'reports': [report.to_dict() for report in self.reports],
            'passed': self.passed,
        }


def _grid_norm(pair: KernelPair, datum: Datum, t: float, r: float, weak: bool, gradient: bool,
               symbol: Symbol, points: Optional[int]) -> float:
    points = int(points or config.get_resolution("grid_points"))
    u0 = GridField.from_datum(datum, box_extent(pair, t, datum.width), points)
    u = evolve(pair, u0, t, symbol)
    if gradient:
        components = gradient_field(u)
        u = u.with_values(np.sqrt(sum(c.values ** 2 for c in components)))
    return weak_lp_quasinorm(u, r) if weak else lp_norm(u, r)


def _radial_weak(profile: RadialProfile, r: float) -> float:
    try:
        return radial_weak_lp_quasinorm(profile, r, monotone=True)
    except ProfileError:
        logger.debug(f"u({profile.t:g}) not radially nonincreasing; using shell measures")
        return radial_weak_lp_quasinorm(profile, r, monotone=False)


def _norm_at(pair: KernelPair, datum: Datum, t: float, r: float, weak: bool, gradient: bool,
             symbol: Symbol, spectrum: Optional[RadialSpectrum], points: Optional[int]) -> float:
    if not datum.radial:
        return _grid_norm(pair, datum, t, r, weak, gradient, symbol, points)
    if r == 2 and not weak:
        if gradient:
            return gradient_l2_norm_radial(pair, spectrum, t, symbol)
        return l2_norm_plancherel_radial(pair, spectrum, t, symbol)
    profile = evolve_radial(pair, datum, t, symbol=symbol, gradient=gradient)
    return _radial_weak(profile, r) if weak else radial_lp_norm(profile, r)


def norm_series(pair: KernelPair, d: int, r: float, datum: Datum, times: Sequence[float],
                weak: bool = False, gradient: bool = False, symbol: Optional[Symbol] = None,
                threads: Optional[int] = None, points: Optional[int] = None) -> DecaySeries:
    """|u(t)|_r, |u(t)|_{r,inf} or |grad u(t)|_r at every sample time"""
    if datum.dimension != d:
        raise DomainError(f"Datum lives in d={datum.dimension}, sweep asks for d={d}")
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    times = np.asarray(times, dtype=float)
    threads = threads or config.get_threads()
    symbol = symbol_for(pair, times, symbol)
    spectrum = RadialSpectrum(datum) if datum.radial and r == 2 and not weak else None
    label = ("grad_" if gradient else "") + (f"weak_L{r:g}" if weak else f"L{r:g}")
    with ProgressTracker(OperationType.DECAY_SWEEP, total=times.size,
                         desc=f"|u|_{label} {pair.name} d={d}", unit="times") as tracker:
        values = parallel_map(lambda t: _norm_at(pair, datum, t, r, weak, gradient, symbol, spectrum, points),
                              list(times), threads, tracker)
    return DecaySeries(label, times, values)


def _judge(claim: str, series: DecaySeries, target: float, tolerance: float,
           window: Tuple[float, float], rate: float) -> Tuple[DecayFit, ClaimReport]:
    fit = fit_decay(series.times, series.values, *window)
    stability_window = last_decades(series.times[(series.times >= window[0]) & (series.times <= window[1])], 1.0)
    try:
        last = fit_decay(series.times, series.values, *stability_window)
        shift = abs(last.slope - fit.slope)
    except DomainError:
        last, shift = None, math.nan
    power_law = bool(shift <= STABILITY_THRESHOLD)
    if not power_law:
        logger.warning(f"{claim}: last-decade slope differs by {shift:.3g}; series is not a clean power law")
    measured = {'slope': fit.slope, 'fit': fit.to_dict(), 'rate': rate, 'last_decade_shift': shift,
                'power_law': power_law, 'series': series.label}
    report = ClaimReport(claim, abs(fit.slope - target) <= tolerance, measured, target=target,
                         tolerance=tolerance, details={'last_decade_fit': last.to_dict() if last else None})
    return fit, report.log()


def decay_sweep(pair: KernelPair, d: int, r: float, times: Sequence[float], datum: Optional[Datum] = None,
                gradient: bool = False, psi: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                window: Optional[Tuple[float, float]] = None, tolerance: Optional[float] = None,
                weak_tolerance: Optional[float] = None, threads: Optional[int] = None,
                points: Optional[int] = None) -> SweepResult:
    """Sweep |u(t)|_r over the times and judge its slope

    Args:
        pair: Kernel pair
        d: Dimension
        r: Norm exponent, r > 1
        times: Increasing positive sample times
        datum: Initial datum (default: unit-mass Gaussian)
        gradient: Sweep |grad u(t)|_r instead
        psi: Rate function replacing (1*l) in the targets
        window: Fit window (default: the last two decades)
        tolerance: Slope tolerance of strong norms
        weak_tolerance: Slope tolerance of the weak norm
        threads: Worker threads over t
        points: Grid points per axis for non-radial data

    Returns:
        SweepResult with the series, fits and reports; at the critical
        dimension only the weak norm is judged
    """
    times = np.sort(np.asarray(times, dtype=float))
    datum = GaussianDatum(d) if datum is None else datum
    tolerance = config.get_tolerance("slope") if tolerance is None else tolerance
    weak_tolerance = config.get_tolerance("weak_slope") if weak_tolerance is None else weak_tolerance
    window = window or last_decades(times)
    rate = decay_rate(pair, window[0], window[1], psi)
    symbol = symbol_for(pair, times)
    threshold = gradient_critical_dimension(r) if gradient else critical_dimension(r)
    critical = math.isclose(d, threshold, rel_tol=1e-12)
    logger.info(f"Decay sweep {pair.name}: d={d}, r={r:g}{' (gradient)' if gradient else ''}, "
                f"{times.size} times, rate {rate:.4f}")

    result = SweepResult()
    prefix = "grad-" if gradient else ""
    strong = norm_series(pair, d, r, datum, times, gradient=gradient, symbol=symbol, threads=threads, points=points)
    result.series[strong.label] = strong
    target = decay_target(d, r, rate, gradient)
    fit, report = _judge(f"{prefix}decay-lr", strong, target, tolerance, window, rate)
    result.fits[strong.label] = fit
    if not critical:
        result.reports.append(report)
    else:
        weak = norm_series(pair, d, r, datum, times, weak=True, gradient=gradient, symbol=symbol,
                           threads=threads, points=points)
        result.series[weak.label] = weak
        fit, report = _judge(f"{prefix}decay-weak", weak, -rate, weak_tolerance, window, rate)
        result.fits[weak.label] = fit
        result.reports.append(report)
    return result


def _l2_series(pair: KernelPair, d: int, datum: Datum, times: np.ndarray) -> np.ndarray:
    return norm_series(pair, d, 2.0, datum, times).values


def lower_bound_ratio(pair: KernelPair, d: int, datum: Datum, times: Sequence[float],
                      on_violation: str = "raise", tolerance: Optional[float] = None) -> ClaimReport:
    """|u(t)|_2 / k(t)^min{1, d/4} is bounded below for data of nonzero mean

    Raises:
        HypothesisError: u0-hat(0) = 0 and on_violation is "raise"
    """
    tolerance = config.get_tolerance("slope") if tolerance is None else tolerance
    if datum.mass == 0:
        message = "Lower bound needs u0-hat(0) != 0; the datum has zero mean"
        if on_violation == "raise":
            raise HypothesisError(message, hypothesis="nonzero-mean")
        logger.warning(message)
        return ClaimReport("lower-bound", True, {'hypothesis_met': False}).log()

    times = np.sort(np.asarray(times, dtype=float))
    times = times[times >= 1.0]
    k = np.asarray(eval_k(pair, times), dtype=float)
    if np.any(k <= 0):
        raise DomainError(f"{pair.name}: k vanishes on the sample times; the lower bound needs k > 0")
    norms = _l2_series(pair, d, datum, times)
    ratio = norms / k ** min(1.0, d / 4.0)
    infimum = float(np.min(ratio))
    try:
        slope = fit_decay(times, ratio, *last_decades(times, 1.0)).slope
    except DomainError:
        slope = fit_decay(times, ratio).slope
    passed = infimum > 0 and slope >= -tolerance
    measured = {'hypothesis_met': True, 'infimum': infimum, 'last_decade_slope': slope, 'dimension': d}
    return ClaimReport("lower-bound", passed, measured, tolerance=tolerance,
                       details={'times': times, 'ratio': ratio}).log()


def log_band_check(pair: KernelPair, d: int, datum: Datum, times: Sequence[float],
                   band: float = LOG_BAND_RATIO) -> ClaimReport:
    """|u(t)|_2 (log t)^min{1, d/4} stays inside a band [b, B] with B/b <= band"""
    times = np.sort(np.asarray(times, dtype=float))
    if np.any(times <= 1.0):
        raise DomainError("Logarithmic band needs t > 1")
    scaled = _l2_series(pair, d, datum, times) * np.log(times) ** min(1.0, d / 4.0)
    lower, upper = float(np.min(scaled)), float(np.max(scaled))
    ratio = upper / lower if lower > 0 else math.inf
    return ClaimReport("log-band", ratio <= band, {'lower': lower, 'upper': upper, 'ratio': ratio, 'dimension': d},
                       target=band, details={'times': times, 'scaled': scaled}).log()


def _radial_difference(pair: FractionalPair, datum: Datum, t: float, p: float, symbol: Symbol) -> float:
    """|u(t) - M Z(t)|_p for radial data, from the spectrum s (u0-hat - M)"""
    d = datum.dimension
    mass = datum.mass
    k = float(eval_k(pair, t))
    scale = math.sqrt(eval_cumulative_l(pair, t))

    def spectrum(rho: np.ndarray) -> np.ndarray:
        mu = rho ** 2
        envelope = k / (k + mu)
        u0_hat = datum.radial_fourier(rho)
        return (symbol(t, mu) - envelope) * (u0_hat - mass) + envelope * u0_hat

    inner = 1e-4 * min(datum.width, scale)
    radii = np.geomspace(inner, datum_radii(pair, datum, t)[-1], config.get_resolution("radial_points"))
    quadrature = HankelQuadrature(d, rho_min=1e-8 / max(datum.width, scale))
    profile = quadrature.profile(spectrum, radii, t, label="u_minus_MZ")
    values = profile.values - mass * k * bessel_potential(d, math.sqrt(k), radii)
    return radial_lp_norm(RadialProfile(d, radii, values, t, "u_minus_MZ"), p)


def _grid_difference(pair: FractionalPair, datum: Datum, t: float, p: float, symbol: Symbol,
                     points: Optional[int]) -> float:
    points = int(points or config.get_resolution("grid_points"))
    extent = Z_BOX_FACTOR * box_extent(pair, t, datum.width)
    u = evolve(pair, GridField.from_datum(datum, extent, points), t, symbol)
    z = z_grid_fft(pair, t, datum.dimension, points, extent, symbol)
    return lp_norm(u.with_values(u.values - datum.mass * z.values), p)


def large_time_profile(alpha: float, d: int, p: float, datum: Datum, times: Sequence[float],
                       tolerance: Optional[float] = None, threads: Optional[int] = None,
                       points: Optional[int] = None) -> ClaimReport:
    """t^((alpha d/2)(1 - 1/p)) |u(t) - M Z(t)|_p decreases at least like t^(-alpha/2)

    The pair is fractional with order alpha and M is the mass of the datum.
    """
    tolerance = config.get_tolerance("weak_slope") if tolerance is None else tolerance
    critical = critical_exponent(d, gradient=True)
    if p < 1 or (critical is not None and p >= critical):
        raise DomainError(f"Large-time profile needs 1 <= p < d/(d-1), got p={p} in d={d}")
    if not math.isfinite(datum.first_moment()):
        logger.warning("Datum has no finite first moment; only the decay to zero is expected")
    pair = FractionalPair(alpha)
    times = np.sort(np.asarray(times, dtype=float))
    symbol = symbol_for(pair, times)
    threads = threads or config.get_threads()

    def one(t: float) -> float:
        if datum.radial:
            return _radial_difference(pair, datum, t, p, symbol)
        return _grid_difference(pair, datum, t, p, symbol, points)

    with ProgressTracker(OperationType.DECAY_SWEEP, total=times.size,
                         desc=f"|u - MZ|_{p:g} d={d}", unit="times") as tracker:
        differences = np.array(parallel_map(one, list(times), threads, tracker))
    scaled = times ** (0.5 * alpha * d * (1.0 - 1.0 / p)) * differences
    decreasing = bool(np.all(np.diff(scaled) < 0))
    fit = fit_decay(times, scaled)
    target = -0.5 * alpha
    passed = decreasing and fit.slope <= target + tolerance
    measured = {'slope': fit.slope, 'decreasing': decreasing, 'mass': datum.mass, 'p': p, 'dimension': d}
    return ClaimReport("large-time-profile", passed, measured, target=target, tolerance=tolerance,
                       details={'times': times, 'scaled': scaled}).log()
