#!/usr/bin/env python3
"""
Solutions u(t) = Z(t) * u0 through the Fourier symbol s(t, |xi|^2)

Grid fields live on a uniform periodic box in d <= 3 and are evolved by a
single multiplication in DFT space.  Radial data in any dimension go
through radial Plancherel integrals (L2 norms) or the Hankel inversion of
`radial` (physical profiles).
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import fft
from scipy.special import gamma

from .errors import ConfigError, DomainError, DomainTooSmallError, ResolutionError, TruncationError
from .kernels import KernelPair, eval_cumulative_l
from .radial import HankelQuadrature, RadialProfile, radial_integral
from .relaxation import symbol_for
from .utils.artifacts import write_csv
from .utils.config import config
from .utils.grids import composite_gauss_legendre, geometric_breakpoints, unit_sphere_area

logger = logging.getLogger(__name__)

Symbol = Callable[[float, np.ndarray], np.ndarray]

# ln of the relative size below which a Gaussian spectrum is treated as zero
_GAUSSIAN_CUTOFF = 40.0


class Datum(ABC):
    """Initial datum u0 known both in physical and in Fourier space"""

    radial = True

    def __init__(self, dimension: int):
        if dimension < 1:
            raise DomainError(f"Dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)

    @property
    @abstractmethod
    def mass(self) -> float:
        """int u0 dx, which is also u0-hat(0)"""
        pass

    @property
    @abstractmethod
    def width(self) -> float:
        """Largest length scale, used to size boxes"""
        pass

    @abstractmethod
    def first_moment(self) -> float:
        """Upper bound of int |x| |u0(x)| dx"""
        pass

    @abstractmethod
    def sample(self, coordinates: Sequence[np.ndarray]) -> np.ndarray:
        """u0 at the points given by one coordinate array per axis"""
        pass

    @abstractmethod
    def radial_fourier(self, rho: np.ndarray) -> np.ndarray:
        """u0-hat as a function of |xi| (radial data only)"""
        pass

    @abstractmethod
    def spectral_cutoff(self) -> float:
        """|xi| beyond which u0-hat is negligible"""
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass


def _gaussian(dimension: int, width: float, squared_radius: np.ndarray) -> np.ndarray:
    return (2.0 * math.pi * width ** 2) ** (-0.5 * dimension) * np.exp(-0.5 * squared_radius / width ** 2)


class GaussianDatum(Datum):
    """u0 = M (2 pi sigma^2)^(-d/2) exp(-|x - c|^2 / (2 sigma^2))"""

    def __init__(self, dimension: int, width: float = 1.0, mass: float = 1.0,
                 center: Optional[Sequence[float]] = None):
        super().__init__(dimension)
        if not width > 0:
            raise DomainError(f"Gaussian width must be positive, got {width}")
        self._width = float(width)
        self._mass = float(mass)
        self.center = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
        if self.center.shape != (dimension,):
            raise DomainError(f"Center must have {dimension} components")
        self.radial = not np.any(self.center)

    @property
    def mass(self) -> float:
        return self._mass

    @property
    def width(self) -> float:
        return self._width + float(np.linalg.norm(self.center))

    def first_moment(self) -> float:
        d = self.dimension
        centered = self._width * math.sqrt(2.0) * gamma(0.5 * (d + 1)) / gamma(0.5 * d)
        return abs(self._mass) * (centered + float(np.linalg.norm(self.center)))

    def sample(self, coordinates: Sequence[np.ndarray]) -> np.ndarray:
        squared = sum((x - c) ** 2 for x, c in zip(coordinates, self.center))
        return self._mass * _gaussian(self.dimension, self._width, squared)

    def radial_fourier(self, rho: np.ndarray) -> np.ndarray:
        if not self.radial:
            raise DomainError("Shifted Gaussian is not radial")
        return self._mass * np.exp(-0.5 * (self._width * np.asarray(rho, dtype=float)) ** 2)

    def spectral_cutoff(self) -> float:
        return math.sqrt(2.0 * _GAUSSIAN_CUTOFF) / self._width

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'gaussian', 'width': self._width, 'mass': self._mass, 'center': self.center}


class DifferenceOfGaussians(Datum):
    """Zero-mass datum A (G_sigma1 - G_sigma2) of two unit-mass Gaussians"""

    def __init__(self, dimension: int, widths: Sequence[float] = (1.0, 2.0), amplitude: float = 1.0):
        super().__init__(dimension)
        if len(widths) != 2 or min(widths) <= 0 or widths[0] == widths[1]:
            raise DomainError(f"Need two distinct positive widths, got {widths}")
        self.widths = (float(widths[0]), float(widths[1]))
        self.amplitude = float(amplitude)

    @property
    def mass(self) -> float:
        return 0.0

    @property
    def width(self) -> float:
        return max(self.widths)

    def first_moment(self) -> float:
        d = self.dimension
        factor = math.sqrt(2.0) * gamma(0.5 * (d + 1)) / gamma(0.5 * d)
        return abs(self.amplitude) * factor * sum(self.widths)

    def sample(self, coordinates: Sequence[np.ndarray]) -> np.ndarray:
        squared = sum(x ** 2 for x in coordinates)
        first, second = (_gaussian(self.dimension, w, squared) for w in self.widths)
        return self.amplitude * (first - second)

    def radial_fourier(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        first, second = (np.exp(-0.5 * (w * rho) ** 2) for w in self.widths)
        return self.amplitude * (first - second)

    def spectral_cutoff(self) -> float:
        return math.sqrt(2.0 * _GAUSSIAN_CUTOFF) / min(self.widths)

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'difference-of-gaussians', 'widths': list(self.widths), 'amplitude': self.amplitude}


def datum_from_dict(spec: Optional[Dict[str, Any]], dimension: int) -> Datum:
    """Build a datum from {"kind": "gaussian", ...}; None gives the unit-mass Gaussian"""
    if spec is None:
        return GaussianDatum(dimension)
    kind = spec.get('kind', 'gaussian')
    try:
        if kind == 'gaussian':
            return GaussianDatum(dimension, spec.get('width', 1.0), spec.get('mass', 1.0), spec.get('center'))
        if kind == 'difference-of-gaussians':
            return DifferenceOfGaussians(dimension, spec.get('widths', (1.0, 2.0)), spec.get('amplitude', 1.0))
    except DomainError as e:
        raise ConfigError(f"Invalid datum: {e}", field="datum")
    raise ConfigError(f"Unknown datum kind {kind!r}", field="datum.kind")


class GridField:
    """Values on the uniform periodic grid [-L/2, L/2)^d with N points per axis"""

    def __init__(self, dimension: int, extent: float, points: int, values: np.ndarray, spectral: bool = False):
        """Initialize a grid field

        Args:
            dimension: 1, 2 or 3
            extent: Box side L
            points: Points per axis N, a power of two
            values: Array of shape (N,)*d; physical values or their DFT
            spectral: Whether values hold the DFT
        """
        if dimension not in (1, 2, 3):
            raise DomainError(f"Grid fields support d in {{1, 2, 3}}, got {dimension}")
        if points < 2 or points & (points - 1):
            raise DomainError(f"Points per axis must be a power of two, got {points}")
        if not extent > 0:
            raise DomainError(f"Box extent must be positive, got {extent}")
        values = np.asarray(values)
        if values.shape != (points,) * dimension:
            raise DomainError(f"Values must have shape {(points,) * dimension}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("Grid field values must be finite")
        values.setflags(write=False)
        self.dimension = dimension
        self.extent = float(extent)
        self.points = int(points)
        self.values = values
        self.spectral = spectral

    @classmethod
    def from_datum(cls, datum: Datum, extent: float, points: int) -> 'GridField':
        """Sample a datum on the box"""
        field = cls(datum.dimension, extent, points, np.zeros((points,) * datum.dimension))
        return field.with_values(datum.sample(field.coordinates()))

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dimension

    def axis(self) -> np.ndarray:
        return (np.arange(self.points) - self.points // 2) * self.spacing

    def coordinates(self) -> List[np.ndarray]:
        return np.meshgrid(*([self.axis()] * self.dimension), indexing='ij')

    def squared_radius(self) -> np.ndarray:
        return sum(x ** 2 for x in self.coordinates())

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * fft.fftfreq(self.points, d=self.spacing)

    def xi_components(self) -> List[np.ndarray]:
        return np.meshgrid(*([self.wavenumbers()] * self.dimension), indexing='ij')

    def xi_squared(self) -> np.ndarray:
        return sum(xi ** 2 for xi in self.xi_components())

    def with_values(self, values: np.ndarray, spectral: bool = False) -> 'GridField':
        return GridField(self.dimension, self.extent, self.points, values, spectral)

    def to_spectral(self) -> 'GridField':
        if self.spectral:
            return self
        # x = 0 moves to index 0 so the DFT matches fftfreq ordering
        return self.with_values(fft.fftn(fft.ifftshift(self.values)), spectral=True)

    def to_physical(self) -> 'GridField':
        if not self.spectral:
            return self
        return self.with_values(fft.fftshift(fft.ifftn(self.values)).real)

    def spectral_l2_norm(self) -> float:
        """L2 norm from the DFT coefficients (discrete Plancherel)"""
        spectrum = self.to_spectral().values
        return float(np.sqrt(np.sum(np.abs(spectrum) ** 2) * self.cell_volume / spectrum.size))

    def boundary_shell_max(self) -> float:
        """max |u| over the outermost layer of grid points"""
        values = np.abs(self.to_physical().values)
        shell = 0.0
        for axis in range(self.dimension):
            shell = max(shell, float(np.max(np.take(values, [0, self.points - 1], axis=axis))))
        return shell

    def write_csv(self, path: str) -> str:
        """Export as `x[,y[,z]],value`"""
        physical = self.to_physical()
        names = ["x", "y", "z"][:self.dimension]
        columns = [c.ravel() for c in self.coordinates()] + [physical.values.ravel()]
        return write_csv(path, names + ["value"], zip(*columns))

    def to_dict(self) -> Dict[str, Any]:
        return {'dimension': self.dimension, 'extent': self.extent, 'points': self.points,
                'spectral': self.spectral}


def box_extent(pair: KernelPair, t: float, width: float = 1.0, safety: Optional[float] = None) -> float:
    """Box side kappa sqrt(2 (sigma^2 + (1*l)(t))): the datum plus the spread Z has reached"""
    safety = config.get_box_safety() if safety is None else safety
    spread = eval_cumulative_l(pair, t) if t > 0 else 0.0
    return safety * math.sqrt(2.0 * (width ** 2 + spread))


def field_for(pair: KernelPair, datum: Datum, t: float, points: Optional[int] = None) -> GridField:
    """The datum sampled on a box sized for time t"""
    points = int(points or config.get_resolution("grid_points"))
    return GridField.from_datum(datum, box_extent(pair, t, datum.width), points)


def _check_boundary(field: GridField, tolerance: Optional[float] = None) -> None:
    tolerance = config.get_tolerance("boundary_shell") if tolerance is None else tolerance
    shell = field.boundary_shell_max()
    if shell < tolerance:
        return
    peak = float(np.max(np.abs(field.to_physical().values)))
    # Gaussian decay: the shell falls to tolerance when L grows by sqrt(log ratio)
    ratio = math.log(peak / tolerance) / max(math.log(peak / shell), 1e-3)
    suggested = field.extent * math.sqrt(max(ratio, 1.0)) * 1.1
    raise DomainTooSmallError(f"Datum reaches {shell:.3g} on the boundary of a box of side {field.extent:.6g}",
                              suggested)


def evolve(pair: KernelPair, u0: GridField, t: float, symbol: Optional[Symbol] = None) -> GridField:
    """u(t) with DFT s(t, |xi|^2) times the DFT of u0

    Args:
        pair: Kernel pair
        u0: Initial datum on its grid
        t: Nonnegative time
        symbol: Optional evaluator (t, mu) -> s(t, mu)

    Raises:
        DomainTooSmallError: u0 is not negligible on the boundary shell
    """
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    u0 = u0.to_physical()
    _check_boundary(u0)
    if t == 0:
        return u0
    symbol = symbol_for(pair, [t], symbol)
    mu = u0.xi_squared()
    s = symbol(t, mu.ravel()).reshape(mu.shape)
    spectrum = u0.to_spectral()
    result = spectrum.with_values(s * spectrum.values, spectral=True).to_physical()
    peak = float(np.max(np.abs(result.values)))
    if peak > 0 and result.boundary_shell_max() > 1e-6 * peak:
        logger.warning(f"u({t:g}) reaches {result.boundary_shell_max() / peak:.3g} of its peak on the boundary")
    return result


def gradient_field(field: GridField) -> List[GridField]:
    """Components of grad u with spectra i xi_k u-hat"""
    spectrum = field.to_spectral()
    return [spectrum.with_values(1j * xi * spectrum.values, spectral=True).to_physical()
            for xi in field.xi_components()]


def lp_norm(field: GridField, p: float) -> float:
    """Riemann-sum L_p norm; p = inf gives max |u|"""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    values = np.abs(field.to_physical().values)
    if np.isinf(p):
        return float(np.max(values))
    return float((np.sum(values ** p) * field.cell_volume) ** (1.0 / p))


def weak_lp_quasinorm(field: GridField, r: float) -> float:
    """sup_lambda lambda d_f(lambda)^(1/r) with d_f(lambda) = cell volume x #{|u_i| > lambda}

    Every sample level is used as lambda, so the supremum is exact for the
    grid function.
    """
    if not r > 1:
        raise DomainError(f"Weak exponent must exceed 1, got {r}")
    values = np.sort(np.abs(field.to_physical().values).ravel())[::-1]
    values = values[values > 0]
    if values.size == 0:
        return 0.0
    measure = np.arange(1, values.size + 1) * field.cell_volume
    return float(np.max(values * measure ** (1.0 / r)))


def msd_analytic(pair: KernelPair, t: float, d: int) -> float:
    """Mean square displacement 2d (1*l)(t)"""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    return 2.0 * d * eval_cumulative_l(pair, t)


def msd_empirical(z: Any, tolerance: Optional[float] = None) -> float:
    """int |x|^2 Z dx from a grid field or a radial profile of Z

    Raises:
        TruncationError: the second moment still carries weight at the edge of the data
    """
    tolerance = config.get_tolerance("msd") if tolerance is None else tolerance
    if isinstance(z, RadialProfile):
        r = z.radii
        moment = radial_integral(z, r ** 2 * z.values)
        tail = unit_sphere_area(z.dimension) * abs(z.values[-1]) * r[-1] ** (z.dimension + 2)
    else:
        physical = z.to_physical()
        squared = physical.squared_radius()
        weighted = squared * physical.values
        moment = float(np.sum(weighted) * physical.cell_volume)
        shell = physical.with_values(weighted).boundary_shell_max()
        tail = shell * physical.extent ** physical.dimension
    if tail > tolerance * abs(moment):
        raise TruncationError(f"Second moment truncated: tail estimate {tail:.3g} vs moment {moment:.6g}",
                              {'tail_estimate': tail, 'moment': moment})
    return moment


class RadialSpectrum:
    """Composite Gauss-Legendre nodes rho_i with u0-hat(rho_i) for a radial datum"""

    def __init__(self, datum: Datum, rho_min: float = 1e-8, rho_max: Optional[float] = None,
                 per_decade: Optional[int] = None, panel_nodes: Optional[int] = None):
        if not datum.radial:
            raise DomainError("Radial spectra need a radially symmetric datum")
        self.datum = datum
        self.rho_min = float(rho_min)
        self.rho_max = float(rho_max or datum.spectral_cutoff())
        self.per_decade = int(per_decade or config.get_resolution("panels_per_decade"))
        self.panel_nodes = int(panel_nodes or config.get_resolution("panel_nodes"))
        breakpoints = geometric_breakpoints(self.rho_min, self.rho_max, self.per_decade)
        self.nodes, self.weights = composite_gauss_legendre(breakpoints, self.panel_nodes)
        self.values = datum.radial_fourier(self.nodes)

    @property
    def dimension(self) -> int:
        return self.datum.dimension

    def refined(self) -> 'RadialSpectrum':
        return RadialSpectrum(self.datum, self.rho_min, self.rho_max, 2 * self.per_decade, self.panel_nodes)

    def tail_fraction(self) -> float:
        """Share of int |u0-hat|^2 rho^(d-1) lying in [rho_max, 2 rho_max]"""
        nodes, weights = composite_gauss_legendre(np.array([self.rho_max, 2.0 * self.rho_max]), self.panel_nodes)
        power = self.dimension - 1
        tail = np.sum(weights * np.abs(self.datum.radial_fourier(nodes)) ** 2 * nodes ** power)
        body = np.sum(self.weights * np.abs(self.values) ** 2 * self.nodes ** power)
        return float(tail / body) if body > 0 else 0.0


def _plancherel(symbol: Symbol, spectrum: RadialSpectrum, t: float, extra_power: int) -> float:
    d = spectrum.dimension
    power = d - 1 + extra_power
    s = symbol(t, spectrum.nodes ** 2)
    body = np.sum(spectrum.weights * (s * np.abs(spectrum.values)) ** 2 * spectrum.nodes ** power)
    inner = abs(spectrum.values[0]) ** 2 * spectrum.rho_min ** (power + 1) / (power + 1)
    return float(np.sqrt((2.0 * np.pi) ** (-d) * unit_sphere_area(d) * (body + inner)))


def _refined_plancherel(pair: KernelPair, spectrum: RadialSpectrum, t: float,
                        symbol: Optional[Symbol], extra_power: int, max_doublings: int = 3) -> float:
    tolerance = config.get_tolerance("radial_refine")
    if spectrum.tail_fraction() > tolerance:
        raise ResolutionError(f"Datum spectrum not negligible beyond rho_max={spectrum.rho_max:.6g}")
    symbol = symbol_for(pair, [t], symbol)
    value = _plancherel(symbol, spectrum, t, extra_power)
    for _ in range(max_doublings):
        spectrum = spectrum.refined()
        refined = _plancherel(symbol, spectrum, t, extra_power)
        if abs(refined - value) <= tolerance * max(refined, np.finfo(float).tiny):
            return refined
        value = refined
    raise ResolutionError(f"Radial Plancherel integral did not settle at t={t:g}")


def l2_norm_plancherel_radial(pair: KernelPair, spectrum: RadialSpectrum, t: float,
                              symbol: Optional[Symbol] = None) -> float:
    """|u(t)|_2 = [(2 pi)^-d omega_{d-1} int s(t, rho^2)^2 |u0-hat|^2 rho^(d-1) drho]^(1/2)"""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return _refined_plancherel(pair, spectrum, t, symbol, 0)


def gradient_l2_norm_radial(pair: KernelPair, spectrum: RadialSpectrum, t: float,
                            symbol: Optional[Symbol] = None) -> float:
    """|grad u(t)|_2 by Plancherel: the L2 integrand carries an extra rho^2"""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    return _refined_plancherel(pair, spectrum, t, symbol, 2)


def datum_radii(pair: KernelPair, datum: Datum, t: float, points: Optional[int] = None) -> np.ndarray:
    """Geometric radii resolving u(t) from well inside the datum to the edge of its spread"""
    points = int(points or config.get_resolution("radial_points"))
    spread = eval_cumulative_l(pair, t) if t > 0 else 0.0
    outer = 40.0 * math.sqrt(datum.width ** 2 + spread)
    return np.geomspace(1e-3 * datum.width, outer, points)


def evolve_radial(pair: KernelPair, datum: Datum, t: float, radii: Optional[Sequence[float]] = None,
                  symbol: Optional[Symbol] = None, gradient: bool = False) -> RadialProfile:
    """Physical profile of u(t) (or of du/dr) for a radial datum in any dimension

    du/dr in R^d equals -2 pi r times the inverse transform of the same
    spectrum taken in R^(d+2).
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if not datum.radial:
        raise DomainError("Radial evolution needs a radially symmetric datum")
    trim = radii is None
    radii = datum_radii(pair, datum, t) if trim else np.asarray(radii, dtype=float)
    symbol = symbol_for(pair, [t], symbol)

    def spectrum(rho: np.ndarray) -> np.ndarray:
        return symbol(t, rho ** 2) * datum.radial_fourier(rho)

    d = datum.dimension
    quadrature = HankelQuadrature(d + 2 if gradient else d, rho_min=1e-8 / datum.width)
    profile = quadrature.profile(spectrum, radii, t, label="du_dr" if gradient else "u", trim=trim)
    if gradient:
        values = -2.0 * np.pi * profile.radii * profile.values
        return RadialProfile(d, profile.radii, values, t, "du_dr", profile.diagnostics)
    return profile
