#!/usr/bin/env python3
"""
Radial Fourier inversion and norms of radial profiles

A radially symmetric function on R^d is carried by its profile in r = |x|.
Its inverse Fourier transform from a radial spectrum F(rho) is

    f(r) = (2 pi)^(-d/2) int_0^inf F(rho) Lambda(rho r) rho^(d-1) drho,

with Lambda(x) = J_nu(x) / x^nu and nu = d/2 - 1.  HankelQuadrature
integrates geometric panels up to the first zero of J_nu and then one panel
between consecutive zeros, so the tail panel sums alternate in sign and
repeated averaging of the partial sums accelerates them.
"""

import logging
import math
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq
from scipy.special import jv, kv

from .errors import DomainError, ProfileError, TruncationError
from .special_functions import radial_bessel
from .utils.artifacts import write_csv
from .utils.config import config
from .utils.grids import gauss_legendre, geometric_breakpoints, unit_ball_volume, unit_sphere_area

logger = logging.getLogger(__name__)

# Levels of pairwise averaging applied to the partial sums of the tail
EULER_LEVELS = 10

# Tail panels evaluated per vectorized batch
PANEL_BATCH = 32

# Zeros of J_nu are bracketed by a sign scan over windows of this width
ZERO_WINDOW = 64.0 * math.pi
ZERO_SCAN_STEP = 0.25

# Relative rounding level of a panel sum; errors below NOISE_FLOOR times the
# accumulated panel magnitude cannot be resolved
NOISE_FLOOR = 1e-13

# Trailing radii whose value is below this multiple of their noise floor are dropped
TRIM_MARGIN = 100.0


class RadialProfile:
    """Samples f(r_i) of a radial function on R^d"""

    def __init__(self,
                 dimension: int,
                 radii: Sequence[float],
                 values: Sequence[float],
                 t: Optional[float] = None,
                 label: str = "Z",
                 diagnostics: Optional[Dict[str, Any]] = None):
        """Initialize a profile

        Args:
            dimension: Space dimension d
            radii: Strictly increasing positive radii
            values: Real profile values at the radii
            t: Time the profile belongs to, if any
            label: Column name used for export
            diagnostics: Quadrature diagnostics (tail estimates, panel counts)
        """
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if dimension < 1:
            raise DomainError(f"Dimension must be >= 1, got {dimension}")
        if radii.ndim != 1 or radii.size < 3 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise DomainError("Radii must be at least three strictly increasing positive values")
        if values.shape != radii.shape or not np.all(np.isfinite(values)):
            raise DomainError("Profile values must be finite and match the radii")
        radii.setflags(write=False)
        values.setflags(write=False)
        self.dimension = int(dimension)
        self.radii = radii
        self.values = values
        self.t = t
        self.label = label
        self.diagnostics = diagnostics or {}

    def scaled(self, factor: float) -> 'RadialProfile':
        return RadialProfile(self.dimension, self.radii, factor * self.values, self.t, self.label, self.diagnostics)

    def worst_increase(self) -> float:
        """Largest rise of |f| between consecutive radii, relative to max |f|"""
        magnitude = np.abs(self.values)
        peak = float(np.max(magnitude))
        if peak == 0:
            return 0.0
        return max(0.0, float(np.max(np.diff(magnitude))) / peak)

    def write_csv(self, path: str) -> str:
        """Export as `r,<label>`"""
        return write_csv(path, ["r", self.label], zip(self.radii, self.values))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dimension': self.dimension,
            't': self.t,
            'label': self.label,
            'points': int(self.radii.size),
            'r_min': float(self.radii[0]),
            'r_max': float(self.radii[-1]),
            'diagnostics': self.diagnostics,
        }


def _sign_changes(values: np.ndarray) -> np.ndarray:
    return np.nonzero(np.signbit(values[:-1]) != np.signbit(values[1:]))[0]


@lru_cache(maxsize=1024)
def _window_zeros(nu: float, window: int) -> np.ndarray:
    """Zeros of J_nu in [window W, (window + 1) W), refined by brentq"""
    lo = window * ZERO_WINDOW
    hi = lo + ZERO_WINDOW
    steps = int(math.ceil(ZERO_WINDOW / ZERO_SCAN_STEP))
    x = lo + ZERO_SCAN_STEP * np.arange(steps + 1)
    if window == 0:
        x = x[1:]
    values = jv(nu, x)
    zeros = np.array([brentq(lambda s: float(jv(nu, s)), x[i], x[i + 1], xtol=1e-13)
                      for i in _sign_changes(values)])
    if zeros.size:
        zeros = zeros[(zeros >= lo) & (zeros < hi)]
    zeros.setflags(write=False)
    return zeros


def bessel_zeros(nu: float, after: float, count: int) -> np.ndarray:
    """The first count zeros of J_nu strictly above `after`"""
    if nu < -0.5:
        raise DomainError(f"Bessel order must be >= -1/2, got {nu}")
    found: List[np.ndarray] = []
    total = 0
    window = max(0, int(after // ZERO_WINDOW))
    while total < count:
        zeros = _window_zeros(float(nu), window)
        zeros = zeros[zeros > after]
        found.append(zeros)
        total += zeros.size
        window += 1
    return np.concatenate(found)[:count]


def first_zero(nu: float) -> float:
    """First positive zero of J_nu"""
    return float(bessel_zeros(nu, 0.0, 1)[0])


def bessel_potential(d: int, a: float, r: np.ndarray) -> np.ndarray:
    """Inverse Fourier transform of 1/(a^2 + |xi|^2) on R^d at radii r"""
    r = np.asarray(r, dtype=float)
    if a <= 0:
        raise DomainError(f"Bessel potential needs a > 0, got {a}")
    nu = 0.5 * d - 1.0
    return (2.0 * math.pi) ** (-0.5 * d) * (a / r) ** nu * kv(abs(nu), a * r)


def _euler_estimate(partial: np.ndarray) -> float:
    s = partial
    for _ in range(min(EULER_LEVELS, s.size - 1)):
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[-1])


class HankelQuadrature:
    """Radial inverse Fourier transform on R^d by panel quadrature"""

    def __init__(self,
                 dimension: int,
                 rho_min: float,
                 tail_tolerance: Optional[float] = None,
                 panel_nodes: Optional[int] = None,
                 per_decade: Optional[int] = None,
                 max_panels: int = 20000):
        """Initialize the quadrature

        Args:
            dimension: Space dimension d
            rho_min: Frequency below which the spectrum is taken constant
            tail_tolerance: Stop once the extrapolated tail changes by less than this
                fraction of the accumulated magnitude
            panel_nodes: Gauss-Legendre nodes per panel
            per_decade: Geometric head panels per decade
            max_panels: Tail panels before giving up
        """
        if dimension < 1:
            raise DomainError(f"Dimension must be >= 1, got {dimension}")
        if not rho_min > 0:
            raise DomainError(f"rho_min must be positive, got {rho_min}")
        self.dimension = int(dimension)
        self.nu = 0.5 * dimension - 1.0
        self.rho_min = float(rho_min)
        self.tail_tolerance = tail_tolerance if tail_tolerance is not None else config.get_tolerance("hankel_tail")
        self.panel_nodes = int(panel_nodes or config.get_resolution("panel_nodes"))
        self.per_decade = int(per_decade or config.get_resolution("panels_per_decade"))
        self.max_panels = max_panels
        self.prefactor = (2.0 * math.pi) ** (-0.5 * dimension)

    def _panel_sums(self, spectrum: Callable[[np.ndarray], np.ndarray], r: float,
                    edges: np.ndarray) -> np.ndarray:
        """Integrals of F(x/r) Lambda(x) x^(d-1) over consecutive x-panels"""
        x, w = gauss_legendre(self.panel_nodes)
        widths = np.diff(edges)
        nodes = edges[:-1, None] + widths[:, None] * x[None, :]
        weights = widths[:, None] * w[None, :]
        values = spectrum(nodes.ravel() / r).reshape(nodes.shape)
        integrand = values * radial_bessel(self.dimension, nodes.ravel()).reshape(nodes.shape)
        integrand *= nodes ** (self.dimension - 1)
        return np.sum(weights * integrand, axis=1)

    def transform(self, spectrum: Callable[[np.ndarray], np.ndarray], r: float) -> Tuple[float, Dict[str, Any]]:
        """f(r) for the spectrum F

        Args:
            spectrum: Vectorized rho -> F(rho), smooth and decaying
            r: Positive radius

        Returns:
            Tuple of (value, diagnostics)

        Raises:
            TruncationError: the tail does not settle within max_panels
        """
        if not r > 0:
            raise DomainError(f"Radius must be positive, got {r}")
        d = self.dimension
        head_end = first_zero(self.nu)
        x_lo = r * self.rho_min

        # below rho_min the spectrum is frozen at F(rho_min) and Lambda at Lambda(0)
        inner = float(spectrum(np.array([self.rho_min]))[0]) * float(radial_bessel(d, np.array([0.0]))[0])
        total = inner * x_lo ** d / d
        if x_lo < head_end:
            total += float(np.sum(self._panel_sums(spectrum, r, geometric_breakpoints(x_lo, head_end, self.per_decade))))
        start = max(head_end, x_lo)

        partial: List[float] = [total]
        magnitude = abs(total)
        estimates: List[float] = []
        converged = False
        panels = 0
        tail = 0.0
        value = total
        while panels < self.max_panels and not converged:
            edges = np.concatenate(([start], bessel_zeros(self.nu, start, PANEL_BATCH)))
            sums = self._panel_sums(spectrum, r, edges)
            start = float(edges[-1])
            for panel in sums:
                panels += 1
                partial.append(partial[-1] + panel)
                magnitude += abs(panel)
                if len(partial) <= EULER_LEVELS + 1:
                    continue
                estimates.append(_euler_estimate(np.array(partial[-(EULER_LEVELS + 1):])))
                tail = estimates[-1] - partial[-1]
                # relative to the value itself, down to what rounding allows
                scale = max(self.tail_tolerance * abs(estimates[-1]), NOISE_FLOOR * magnitude,
                            np.finfo(float).tiny)
                settled = len(estimates) >= 3 and max(abs(estimates[-1] - estimates[-2]),
                                                      abs(estimates[-2] - estimates[-3])) <= scale
                negligible = all(abs(b - a) <= scale for a, b in zip(partial[-4:-1], partial[-3:]))
                if negligible or settled:
                    # a negligible tail keeps the direct sum; the averages lag behind it
                    value = partial[-1] if negligible else estimates[-1]
                    converged = True
                    break

        unit = self.prefactor / r ** d
        diagnostics = {'panels': panels, 'tail_estimate': float(tail), 'magnitude': float(magnitude),
                       'noise_floor': float(NOISE_FLOOR * magnitude * unit)}
        if not converged:
            raise TruncationError(f"Hankel tail did not settle at r={r:.6g} after {panels} panels", diagnostics)
        return value * unit, diagnostics

    def profile(self, spectrum: Callable[[np.ndarray], np.ndarray], radii: Sequence[float],
                t: Optional[float] = None, label: str = "Z", trim: bool = False) -> RadialProfile:
        """Transform at every radius and collect a RadialProfile

        With trim set, trailing radii whose values are lost in rounding are dropped.
        """
        radii = np.asarray(radii, dtype=float)
        values = np.empty(radii.size)
        floors = np.empty(radii.size)
        worst_tail = 0.0
        panels = 0
        for i, r in enumerate(radii):
            values[i], info = self.transform(spectrum, float(r))
            floors[i] = info['noise_floor']
            worst_tail = max(worst_tail, abs(info['tail_estimate']) * self.prefactor / r ** self.dimension)
            panels = max(panels, info['panels'])
        keep = resolved_count(values, floors) if trim else radii.size
        logger.debug(f"Hankel profile d={self.dimension} at {keep} of {radii.size} radii (max {panels} tail panels)")
        return RadialProfile(self.dimension, radii[:keep], values[:keep], t, label,
                             {'max_tail_panels': panels, 'max_tail_estimate': worst_tail,
                              'max_noise_floor': float(np.max(floors[:keep]))})


def resolved_count(values: np.ndarray, floors: np.ndarray, minimum: int = 3) -> int:
    """Length of the leading run of radii to keep, dropping trailing values below TRIM_MARGIN floors"""
    resolved = np.nonzero(np.abs(values) >= TRIM_MARGIN * floors)[0]
    last = int(resolved[-1]) + 1 if resolved.size else 0
    return min(values.size, max(last, minimum))


def radial_integral(profile: RadialProfile, integrand: Optional[np.ndarray] = None) -> float:
    """omega_{d-1} int g(r) r^(d-1) dr for g sampled on the profile radii

    The integral runs over [r_0, r_max] by Simpson's rule in log r, plus
    g(r_0) times the ball of radius r_0.
    """
    g = profile.values if integrand is None else np.asarray(integrand, dtype=float)
    d = profile.dimension
    r = profile.radii
    body = simpson(g * r ** d, x=np.log(r))
    inner = g[0] * r[0] ** d / d
    return float(unit_sphere_area(d) * (body + inner))


def radial_lp_norm(profile: RadialProfile, p: float) -> float:
    """|f|_p of a radial profile; p = inf gives the largest sample"""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    magnitude = np.abs(profile.values)
    if np.isinf(p):
        return float(np.max(magnitude))
    return radial_integral(profile, magnitude ** p) ** (1.0 / p)


def radial_weak_lp_quasinorm(profile: RadialProfile, r: float, monotone: bool = True,
                             tolerance: Optional[float] = None) -> float:
    """sup_lambda lambda |{|f| > lambda}|^(1/r) of a radial profile

    With monotone=True the profile must be radially nonincreasing (checked)
    and the level set {|f| > |f(r_i)|} is the ball of radius r_i.  Otherwise
    the distribution function is accumulated from the shells around each
    radius.
    """
    if not r > 1:
        raise DomainError(f"Weak exponent must exceed 1, got {r}")
    d = profile.dimension
    magnitude = np.abs(profile.values)
    if monotone:
        tolerance = config.get_tolerance("negativity") if tolerance is None else tolerance
        worst = profile.worst_increase()
        if worst > tolerance:
            raise ProfileError(f"Profile rises by {worst:.3g} of its maximum; not radially nonincreasing")
        measure = unit_ball_volume(d) * profile.radii ** d
        return float(np.max(magnitude * measure ** (1.0 / r)))

    radii = profile.radii
    edges = np.concatenate(([0.0], np.sqrt(radii[:-1] * radii[1:]), [radii[-1]]))
    shells = unit_ball_volume(d) * np.diff(edges ** d)
    order = np.argsort(-magnitude, kind="stable")
    measure = np.cumsum(shells[order])
    return float(np.max(magnitude[order] * measure ** (1.0 / r)))
