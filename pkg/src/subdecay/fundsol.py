#!/usr/bin/env python3
"""
Fundamental solution Z(t, x), the inverse Fourier transform of s(t, |xi|^2)

Radial profiles split off the lower envelope k(t)/(k(t) + rho^2) of the
symbol.  Its inverse transform is the Bessel potential k(t) G_sqrt(k(t))
and is added back in closed form; the remainder decays like rho^-4 and goes
through the Hankel quadrature of `radial`.  Pairs with a point mass in k
have no envelope and are transformed as they are.  Grids in d <= 3 use a
single inverse FFT.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft
from scipy.integrate import simpson

from .errors import DomainError, DomainTooSmallError, ResolutionError
from .field import GridField, box_extent, msd_analytic, msd_empirical
from .fitting import decay_rate, fit_decay
from .kernels import FractionalPair, KernelPair, eval_cumulative_l, eval_k
from .radial import (
    HankelQuadrature, RadialProfile, bessel_potential, radial_integral, radial_weak_lp_quasinorm,
    resolved_count, NOISE_FLOOR, TRIM_MARGIN,
)
from .relaxation import symbol_for
from .reports import ClaimReport
from .utils.config import config
from .utils.grids import unit_sphere_area
from .utils.progress import OperationType, ProgressTracker, parallel_map

logger = logging.getLogger(__name__)

Symbol = Callable[[float, np.ndarray], np.ndarray]

# Default radii in units of sqrt((1*l)(t))
RADIAL_SPAN = (1e-4, 40.0)

# Box side of Z grids relative to the box of a Gaussian datum
Z_BOX_FACTOR = 2.5

MAX_HALVINGS = 10
RADII_PER_HALVING = 4
DIVERGENT_RATIO = 0.97
CONVERGENT_RATIO = 0.9
INCREMENT_FLOOR = 1e-3

SIGMA_MARGIN = 0.9


def critical_exponent(d: int, gradient: bool = False) -> Optional[float]:
    """Smallest p with Z(t) (or grad Z(t)) outside L_p; None when Z is bounded

    d/(d-2) for Z in d >= 3 and d/(d-1) for grad Z in d >= 2.  Z in d = 2
    has a logarithmic singularity and only misses L_inf.
    """
    if d < 1:
        raise DomainError(f"Dimension must be >= 1, got {d}")
    if gradient:
        return None if d == 1 else d / (d - 1.0)
    if d == 1:
        return None
    return math.inf if d == 2 else d / (d - 2.0)


def z_radii(pair: KernelPair, t: float, points: Optional[int] = None) -> np.ndarray:
    """Geometric radii from 1e-4 to 40 times sqrt((1*l)(t))"""
    points = int(points or config.get_resolution("radial_points"))
    scale = math.sqrt(eval_cumulative_l(pair, t))
    return np.geomspace(RADIAL_SPAN[0] * scale, RADIAL_SPAN[1] * scale, points)


class ZEvaluator:
    """Z(t, r) of one pair at one time in R^d, at any radii"""

    def __init__(self, pair: KernelPair, t: float, d: int, symbol: Optional[Symbol] = None):
        if not t > 0:
            raise DomainError(f"t must be positive, got {t}")
        if d < 1:
            raise DomainError(f"Dimension must be >= 1, got {d}")
        self.pair = pair
        self.t = float(t)
        self.dimension = int(d)
        self.symbol = symbol_for(pair, [t], symbol)
        self.envelope = self._envelope_rate()
        scale = math.sqrt(eval_cumulative_l(pair, t))
        self.quadrature = HankelQuadrature(d, rho_min=1e-8 / scale)

    def _envelope_rate(self) -> float:
        if self.pair.k_atom > 0:
            return 0.0
        k = float(eval_k(self.pair, self.t))
        return k if np.isfinite(k) and k > 0 else 0.0

    def remainder(self, rho: np.ndarray) -> np.ndarray:
        mu = rho ** 2
        s = self.symbol(self.t, mu)
        if self.envelope > 0:
            s = s - self.envelope / (self.envelope + mu)
        return s

    def evaluate(self, radii: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, Dict[str, Any]]:
        """Z at the radii, with the rounding floor of each value"""
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if np.any(~(radii > 0)):
            raise DomainError("Radii must be positive")
        values = np.empty(radii.size)
        floors = np.empty(radii.size)
        worst_tail = 0.0
        panels = 0
        for i, r in enumerate(radii):
            values[i], info = self.quadrature.transform(self.remainder, float(r))
            floors[i] = info['noise_floor']
            worst_tail = max(worst_tail, abs(info['tail_estimate']) * self.quadrature.prefactor / r ** self.dimension)
            panels = max(panels, info['panels'])
        if self.envelope > 0:
            potential = self.envelope * bessel_potential(self.dimension, math.sqrt(self.envelope), radii)
            values += potential
            floors += NOISE_FLOOR * np.abs(potential)
        return values, floors, {'max_tail_panels': panels, 'max_tail_estimate': worst_tail,
                                'envelope_rate': self.envelope}

    def __call__(self, radii: Sequence[float]) -> Tuple[np.ndarray, Dict[str, Any]]:
        values, _, diagnostics = self.evaluate(radii)
        return values, diagnostics

    def resolved(self, radii: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, Dict[str, Any]]:
        """Like calling the evaluator, minus the trailing radii where Z is below the rounding floor"""
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        values, floors, diagnostics = self.evaluate(radii)
        keep = resolved_count(values, floors)
        if keep < radii.size:
            logger.debug(f"Z({self.t:g}) in d={self.dimension}: dropped {radii.size - keep} radii "
                         f"beyond r={radii[keep - 1]:.4g} below the rounding floor")
        diagnostics['dropped_radii'] = int(radii.size - keep)
        return radii[:keep], values[:keep], diagnostics


def _checked_profile(profile: RadialProfile) -> RadialProfile:
    peak = float(np.max(profile.values))
    floor = config.get_tolerance("negativity") * peak
    if np.min(profile.values) < -floor:
        logger.warning(f"Z({profile.t:g}) in d={profile.dimension} dips to {np.min(profile.values):.3g} "
                       f"(peak {peak:.3g}); quadrature error above the negativity floor")
    return profile


def z_radial_hankel(pair: KernelPair, t: float, d: int, radii: Optional[Sequence[float]] = None,
                    symbol: Optional[Symbol] = None) -> RadialProfile:
    """Radial profile of Z(t, .) in R^d

    Args:
        pair: Kernel pair
        t: Positive time
        d: Dimension, any d >= 1
        radii: Positive radii (default: z_radii, less trailing radii below the rounding floor)
        symbol: Optional evaluator (t, mu) -> s(t, mu)

    Returns:
        RadialProfile labelled "Z"

    Raises:
        TruncationError: the oscillatory tail did not settle at some radius
    """
    evaluator = ZEvaluator(pair, t, d, symbol)
    if radii is None:
        radii, values, diagnostics = evaluator.resolved(z_radii(pair, t))
    else:
        radii = np.asarray(radii, dtype=float)
        values, diagnostics = evaluator(radii)
    logger.debug(f"Z profile {pair.name} t={t:g} d={d}: {radii.size} radii, "
                 f"{diagnostics['max_tail_panels']} tail panels at most")
    return _checked_profile(RadialProfile(d, radii, values, t, "Z", diagnostics))


def z_gradient_radial(pair: KernelPair, t: float, d: int, radii: Optional[Sequence[float]] = None,
                      symbol: Optional[Symbol] = None) -> RadialProfile:
    """Radial derivative dZ/dr, equal to -2 pi r times Z(t, r) in R^(d+2)"""
    evaluator = ZEvaluator(pair, t, d + 2, symbol)
    if radii is None:
        radii, values, diagnostics = evaluator.resolved(z_radii(pair, t))
    else:
        radii = np.asarray(radii, dtype=float)
        values, diagnostics = evaluator(radii)
    return RadialProfile(d, radii, -2.0 * math.pi * radii * values, t, "dZ_dr", diagnostics)


def z_grid_fft(pair: KernelPair, t: float, d: int, points: Optional[int] = None,
               extent: Optional[float] = None, symbol: Optional[Symbol] = None) -> GridField:
    """Z(t) on a periodic grid in d <= 3 by one inverse FFT of the sampled symbol

    Raises:
        ResolutionError: the symbol has not decayed at the Nyquist frequency
        DomainTooSmallError: Z still carries mass on the boundary of the box
    """
    if d not in (1, 2, 3):
        raise DomainError(f"Grid reconstruction supports d in {{1, 2, 3}}, got {d}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    points = int(points or config.get_resolution("grid_points"))
    extent = Z_BOX_FACTOR * box_extent(pair, t, width=0.0) if extent is None else float(extent)
    grid = GridField(d, extent, points, np.zeros((points,) * d))
    symbol = symbol_for(pair, [t], symbol)
    mu = grid.xi_squared()
    s = symbol(t, mu.ravel()).reshape(mu.shape)

    nyquist = max(float(np.max(np.abs(np.take(s, [points // 2], axis=axis)))) for axis in range(d))
    if nyquist > config.get_tolerance("aliasing"):
        raise ResolutionError(f"Symbol is still {nyquist:.3g} at the Nyquist frequency "
                              f"(box {extent:.6g}, {points} points)")

    z = grid.with_values(fft.fftshift(fft.ifftn(s)).real / grid.cell_volume)
    escaped = z.boundary_shell_max() * extent ** d
    if escaped > config.get_tolerance("mass"):
        raise DomainTooSmallError(f"Z({t:g}) reaches the boundary of a box of side {extent:.6g}", 1.5 * extent)
    return z


class NormEstimate:
    """Radial L_p norm of Z or grad Z with its refinement verdict

    status is "finite", "divergent" or "indeterminate"; value is None when
    the norm diverges.
    """

    def __init__(self, p: float, t: float, status: str, value: Optional[float],
                 trend: Optional[List[Dict[str, float]]] = None):
        self.p = p
        self.t = t
        self.status = status
        self.value = value
        self.trend = trend or []

    @property
    def finite(self) -> bool:
        return self.status == "finite"

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 't': self.t, 'status': self.status, 'value': self.value, 'trend': self.trend}


def classify_refinement(increments: Sequence[float], total: float) -> Optional[str]:
    """Verdict on a sequence of r_min-halving increments, None while undecided"""
    inc = list(increments)
    if len(inc) >= 4:
        steady = all(b >= DIVERGENT_RATIO * a for a, b in zip(inc[-4:-1], inc[-3:]))
        if steady and all(b > INCREMENT_FLOOR * total for b in inc[-3:]):
            return "divergent"
    if len(inc) >= 2 and inc[-1] <= CONVERGENT_RATIO * inc[-2] and inc[-1] < INCREMENT_FLOOR * total:
        return "finite"
    return None


def z_lp_norm(pair: KernelPair, t: float, d: int, p: float, gradient: bool = False,
              symbol: Optional[Symbol] = None, max_halvings: int = MAX_HALVINGS) -> NormEstimate:
    """|Z(t)|_p (or |grad Z(t)|_p) by radial quadrature

    In d >= 2 the smallest radius is halved repeatedly, four new radii per
    halving, and the integral over each new inner shell is recorded.  Shell
    contributions that keep their size mark a divergent norm, shrinking ones
    a finite norm.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    evaluator = ZEvaluator(pair, t, d + 2 if gradient else d, symbol)
    factor = (lambda r: 2.0 * math.pi * r) if gradient else (lambda r: 1.0)
    radii, raw, _ = evaluator.resolved(z_radii(pair, t))
    values = np.abs(factor(radii) * raw)
    omega = unit_sphere_area(d)

    def integral(r: np.ndarray, v: np.ndarray) -> float:
        if np.isinf(p):
            return float(np.max(v))
        return float(omega * simpson(v ** p * r ** d, x=np.log(r)))

    total = integral(radii, values)
    r_min, v_min = float(radii[0]), float(values[0])
    if d == 1:
        inner = 0.0 if np.isinf(p) else omega * v_min ** p * r_min / d
        value = total if np.isinf(p) else (total + inner) ** (1.0 / p)
        return NormEstimate(p, t, "finite", value)

    increments: List[float] = []
    trend: List[Dict[str, float]] = []
    verdict = None
    for _ in range(max_halvings):
        new = r_min * 2.0 ** (-np.arange(RADII_PER_HALVING, 0, -1) / RADII_PER_HALVING)
        raw, _ = evaluator(new)
        new_values = np.abs(factor(new) * raw)
        if np.isinf(p):
            increment = max(0.0, float(np.max(new_values)) - total)
        else:
            increment = integral(np.append(new, r_min), np.append(new_values, v_min))
        total += increment
        increments.append(increment)
        r_min, v_min = float(new[0]), float(new_values[0])
        trend.append({'r_min': r_min, 'integral': total, 'increment': increment})
        verdict = classify_refinement(increments, total)
        if verdict is not None:
            break

    status = verdict or "indeterminate"
    if status == "divergent":
        value = None
    elif np.isinf(p):
        value = total
    else:
        value = (total + omega * v_min ** p * r_min ** d / d) ** (1.0 / p)
    logger.debug(f"|{'grad ' if gradient else ''}Z({t:g})|_{p:g} in d={d}: {status} after {len(increments)} halvings")
    return NormEstimate(p, t, status, value, trend)


def z_weak_lp(pair: KernelPair, t: float, d: int, profile: Optional[RadialProfile] = None,
              symbol: Optional[Symbol] = None) -> float:
    """Weak L_{d/(d-2)} quasinorm of Z(t) in d >= 3

    Raises:
        ProfileError: the profile is not radially nonincreasing
    """
    if d < 3:
        raise DomainError(f"Weak norm of Z needs d >= 3, got {d}")
    profile = z_radial_hankel(pair, t, d, symbol=symbol) if profile is None else profile
    return radial_weak_lp_quasinorm(profile, d / (d - 2.0), monotone=True)


def mass_check(profile: RadialProfile, tolerance: Optional[float] = None) -> ClaimReport:
    """omega_{d-1} int Z r^(d-1) dr = 1 and Z >= 0 up to quadrature error"""
    tolerance = config.get_tolerance("mass") if tolerance is None else tolerance
    mass = radial_integral(profile)
    peak = float(np.max(profile.values))
    minimum = float(np.min(profile.values))
    floor = -config.get_tolerance("negativity") * peak
    passed = abs(mass - 1.0) <= tolerance and minimum >= floor
    return ClaimReport("mass", passed, {'mass': mass, 'min_value': minimum, 'max_value': peak,
                                        'dimension': profile.dimension, 't': profile.t},
                       target=1.0, tolerance=tolerance).log()


def msd_check(pair: KernelPair, t: float, d: int, profile: Optional[RadialProfile] = None,
              tolerance: Optional[float] = None) -> ClaimReport:
    """Empirical second moment of Z(t) against 2d (1*l)(t)"""
    tolerance = config.get_tolerance("msd") if tolerance is None else tolerance
    profile = z_radial_hankel(pair, t, d) if profile is None else profile
    expected = msd_analytic(pair, t, d)
    measured = msd_empirical(profile, tolerance)
    error = abs(measured - expected) / expected
    return ClaimReport("msd", error <= tolerance, {'empirical': measured, 'relative_error': error, 't': t,
                                                   'dimension': d},
                       target=expected, tolerance=tolerance).log()


def z_norm_series(pair: KernelPair, times: Sequence[float], d: int, p: float, weak: bool = False,
                  gradient: bool = False, threads: Optional[int] = None) -> List[Any]:
    """Norms of Z at every time: NormEstimates, or weak quasinorms when weak is set"""
    threads = threads or config.get_threads()
    symbol = symbol_for(pair, times)

    def one(t: float) -> Any:
        if weak:
            return z_weak_lp(pair, t, d, symbol=symbol)
        return z_lp_norm(pair, t, d, p, gradient=gradient, symbol=symbol)

    label = "weak" if weak else f"L{p:g}"
    with ProgressTracker(OperationType.PROFILE, total=len(times), desc=f"|Z|_{label} {pair.name} d={d}",
                         unit="times") as tracker:
        return parallel_map(one, list(times), threads, tracker)


def z_norm_decay_check(pair: KernelPair, times: Sequence[float], d: int, p: float, weak: bool = False,
                       gradient: bool = False, window: Optional[Tuple[float, float]] = None,
                       tolerance: Optional[float] = None, threads: Optional[int] = None) -> ClaimReport:
    """Fitted decay slope of |Z(t)|_p, |grad Z(t)|_p or the weak quasinorm against its target

    Targets are -rate (d/2)(1 - 1/p) for L_p, with an extra -rate/2 for the
    gradient, and -rate for the weak L_{d/(d-2)} quasinorm; rate is the
    window slope of (1*l).
    """
    if tolerance is None:
        tolerance = config.get_tolerance("weak_slope" if weak else "slope")
    times = np.asarray(times, dtype=float)
    t_lo, t_hi = window or (float(times.min()), float(times.max()))
    rate = decay_rate(pair, t_lo, t_hi)
    if weak:
        target = -rate
    else:
        target = -rate * (0.5 * d) * (1.0 - 1.0 / p)
        if gradient:
            target -= 0.5 * rate

    results = z_norm_series(pair, times, d, p, weak=weak, gradient=gradient, threads=threads)
    if weak:
        values = np.array(results, dtype=float)
        statuses = ["finite"] * len(results)
    else:
        statuses = [r.status for r in results]
        values = np.array([r.value if r.finite else np.nan for r in results], dtype=float)

    claim = "z-weak-decay" if weak else ("grad-z-lp-decay" if gradient else "z-lp-decay")
    if not all(s == "finite" for s in statuses):
        return ClaimReport(claim, False, {'statuses': statuses, 'p': p, 'dimension': d},
                           target=target, tolerance=tolerance).log()
    fit = fit_decay(times, values, t_lo, t_hi)
    measured = {'slope': fit.slope, 'fit': fit.to_dict(), 'rate': rate, 'p': p, 'dimension': d}
    return ClaimReport(claim, abs(fit.slope - target) <= tolerance, measured, target=target,
                       tolerance=tolerance, details={'times': times, 'values': values}).log()


def z_divergence_check(pair: KernelPair, t: float, d: int, p: float, gradient: bool = False) -> ClaimReport:
    """The refinement verdict agrees with the critical exponent of Z (or grad Z)"""
    critical = critical_exponent(d, gradient)
    expected = "divergent" if critical is not None and p >= critical else "finite"
    estimate = z_lp_norm(pair, t, d, p, gradient=gradient)
    claim = "grad-z-lp-membership" if gradient else "z-lp-membership"
    return ClaimReport(claim, estimate.status == expected,
                       {'status': estimate.status, 'critical_exponent': critical, 'p': p, 'dimension': d},
                       target=expected, details={'trend': estimate.trend}).log()


def _near_weight(d: int, t: np.ndarray, x: np.ndarray, R: np.ndarray, alpha: float, gradient: bool) -> np.ndarray:
    if gradient:
        return t ** alpha * (x ** (d - 1) if d >= 2 else 1.0)
    if d == 1:
        return t ** (0.5 * alpha)
    if d == 2:
        return t ** alpha / (np.abs(np.log(R)) + 1.0)
    return t ** alpha * x ** (d - 2)


def _far_constants(values: np.ndarray, t: np.ndarray, R: np.ndarray, alpha: float,
                   time_power: float) -> Tuple[float, float]:
    """Smallest (C, sigma) of values <= C t^-time_power exp(-sigma R^(1/(2-alpha)))"""
    if values.size < 3:
        return math.nan, math.nan
    X = R ** (1.0 / (2.0 - alpha))
    Y = np.log(values * t ** time_power)
    slope, _ = np.polyfit(X, Y, 1)
    # sigma sits 10% below the fitted rate; C is then set by the bulk of the branch
    sigma = -SIGMA_MARGIN * float(slope)
    return float(np.max(np.exp(Y + sigma * X))), sigma


def _kochubei_constants(pair: KernelPair, alpha: float, d: int, times: np.ndarray, radii: np.ndarray,
                        gradient: bool) -> Dict[str, float]:
    samples: Dict[int, List[np.ndarray]] = {0: [], 1: []}
    floors: Dict[int, List[np.ndarray]] = {0: [], 1: []}
    for t in times:
        z, z_floor, _ = ZEvaluator(pair, t, d).evaluate(radii)
        samples[0].append(z)
        floors[0].append(z_floor)
        if gradient:
            raw, raw_floor, _ = ZEvaluator(pair, t, d + 2).evaluate(radii)
            samples[1].append(np.abs(2.0 * math.pi * radii * raw))
            floors[1].append(2.0 * math.pi * radii * raw_floor)

    T = np.repeat(times[:, None], radii.size, axis=1)
    X = np.repeat(radii[None, :], times.size, axis=0)
    R = T ** (-alpha) * X ** 2
    constants: Dict[str, float] = {}
    for name, index, time_power in (("z", 0, 0.5 * alpha * d), ("grad", 1, 0.5 * alpha * (d + 1))):
        if index == 1 and not gradient:
            continue
        values = np.array(samples[index])
        # samples lost in rounding carry no information
        usable = values > TRIM_MARGIN * np.array(floors[index])
        far = usable & (R >= 1)
        near = usable & (R <= 1)
        constants[f"{name}_far_C"], constants[f"{name}_far_sigma"] = _far_constants(
            values[far], T[far], R[far], alpha, time_power)
        weights = _near_weight(d, T[near], X[near], R[near], alpha, index == 1)
        constants[f"{name}_near_C"] = float(np.max(values[near] * weights)) if np.any(near) else math.nan
    return constants


def _refine(samples: np.ndarray) -> np.ndarray:
    return np.sort(np.concatenate((samples, np.sqrt(samples[:-1] * samples[1:]))))


def kochubei_bound_check(t_samples: Sequence[float], x_samples: Sequence[float], alpha: float, d: int,
                         gradient: bool = True, tolerance: float = 0.25) -> ClaimReport:
    """Fit the constants of the two-regime bounds of Z (and grad Z) for the fractional pair

    With R = t^-alpha |x|^2, the bound for R >= 1 is C t^(-alpha d/2)
    exp(-sigma R^(1/(2-alpha))).  For R <= 1 it is C t^(-alpha/2) in d = 1,
    C t^-alpha (|log R| + 1) in d = 2 and C t^-alpha |x|^(2-d) in d >= 3.  The
    gradient carries one more power t^(-alpha/2) for R >= 1 and is bounded by
    C t^-alpha |x|^(1-d) (d >= 2) or C t^-alpha (d = 1) for R <= 1.  The check
    passes when every sampled branch has finite constants, sigma > 0, and the
    constants move by at most `tolerance` (relative) when both sample sets are
    refined.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"Kochubei bounds need 0 < alpha < 1, got {alpha}")
    times = np.sort(np.asarray(t_samples, dtype=float))
    radii = np.sort(np.asarray(x_samples, dtype=float))
    if times.size < 2 or radii.size < 2 or np.any(times <= 0) or np.any(radii <= 0):
        raise DomainError("Need at least two positive times and two positive radii")
    pair = FractionalPair(alpha)

    coarse = _kochubei_constants(pair, alpha, d, times, radii, gradient)
    fine = _kochubei_constants(pair, alpha, d, _refine(times), _refine(radii), gradient)

    changes = {}
    sampled = [name for name, value in coarse.items() if np.isfinite(value)]
    for name in sampled:
        changes[name] = abs(fine[name] - coarse[name]) / abs(fine[name]) if fine[name] else math.inf
    sigmas_positive = all(coarse[n] > 0 and fine[n] > 0 for n in sampled if n.endswith("sigma"))
    passed = bool(sampled) and sigmas_positive and all(c <= tolerance for c in changes.values())
    measured = {'constants': coarse, 'refined_constants': fine, 'relative_changes': changes,
                'alpha': alpha, 'dimension': d, 'samples': int(times.size * radii.size)}
    return ClaimReport("kochubei-bounds", passed, measured, tolerance=tolerance).log()
