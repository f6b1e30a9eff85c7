#!/usr/bin/env python3
"""
Sum of fractional derivatives: k = sum_j delta_j g_{1-alpha_j}

The resolvent l has no closed form.  It is recovered from k * l = 1 by
piecewise-constant product integration, i.e. forward substitution in

    sum_{j<=i} l_j [K(t_i - t_{j-1}) - K(t_i - t_j)] = 1,   K = 1*k,

on a mesh that resolves the t^(alpha_max - 1) singularity at the origin.
"""

import logging
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .base import KernelPair
from .fractional import riesz_kernel
from ..errors import DomainError, SingularKernelError
from ..utils.config import config
from ..utils.grids import graded_grid, log_graded_grid

logger = logging.getLogger(__name__)

# Cells narrower than this fraction of their distance to t_i use the midpoint rule
_MIDPOINT_RATIO = 1e-2

MESHES = ("log", "graded")


class FractionalSumPair(KernelPair):
    """Kernel pair for a weighted sum of Caputo derivatives"""

    def __init__(self,
                 alphas: Sequence[float],
                 weights: Sequence[float],
                 horizon: float = 1e7,
                 points: Optional[int] = None,
                 mesh: str = "log",
                 t_floor: float = 1e-8):
        """Build the pair and solve for its resolvent

        Args:
            alphas: Strictly increasing orders in (0, 1)
            weights: Positive weights, one per order
            horizon: Largest time at which l and (1*l) are available
            points: Number of mesh cells (deconvolution_points by default)
            mesh: "log" ({0} plus a geometric mesh from t_floor) or "graded" (T (i/N)^2)
            t_floor: First positive node of the log mesh
        """
        alphas = [float(a) for a in alphas]
        weights = [float(w) for w in weights]
        if not alphas or len(alphas) != len(weights):
            raise DomainError("Need one positive weight per fractional order")
        if any(not 0 < a < 1 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise DomainError(f"Orders must be strictly increasing in (0, 1), got {alphas}")
        if any(not w > 0 for w in weights):
            raise DomainError(f"Weights must be positive, got {weights}")
        if mesh not in MESHES:
            raise DomainError(f"Unknown mesh {mesh!r}; expected one of {MESHES}")
        if not 0 < t_floor < horizon:
            raise DomainError(f"Need 0 < t_floor < horizon, got {t_floor}, {horizon}")

        orders = ", ".join(f"{a:g}" for a in alphas)
        super().__init__(f"fractional-sum(alphas=[{orders}])")
        self.alphas = alphas
        self.weights = weights
        self.horizon = float(horizon)
        self.points = int(points or config.get_resolution("deconvolution_points"))
        self.mesh = mesh
        self.t_floor = float(t_floor)

        if mesh == "graded":
            self._nodes = graded_grid(self.horizon, self.points + 1, config.get_resolution("grade"))
        else:
            self._nodes = log_graded_grid(self.t_floor, self.horizon, self.points + 1)
        self._cells = self._deconvolve()
        self._build_integrals()
        self._build_interpolant()

    def time_range(self):
        return 0.0, self.horizon

    def k(self, t: np.ndarray) -> np.ndarray:
        return sum(w * riesz_kernel(1.0 - a, t) for a, w in zip(self.alphas, self.weights))

    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        """K = 1*k, available in closed form"""
        return sum(w * riesz_kernel(2.0 - a, t) for a, w in zip(self.alphas, self.weights))

    def _row_weights(self, i: int) -> np.ndarray:
        """Product-integration weights of row i against cells 1..i"""
        t = self._nodes
        lo = t[i] - t[1:i + 1]
        hi = t[i] - t[:i]
        w = self.cumulative_k(hi) - self.cumulative_k(lo)
        narrow = (lo > 0) & ((hi - lo) < _MIDPOINT_RATIO * lo)
        if np.any(narrow):
            w[narrow] = (hi[narrow] - lo[narrow]) * self.k(0.5 * (hi[narrow] + lo[narrow]))
        return w

    def _deconvolve(self) -> np.ndarray:
        n = self.points
        cells = np.zeros(n)
        for i in range(1, n + 1):
            w = self._row_weights(i)
            pivot = w[-1]
            if not np.isfinite(pivot) or pivot <= 0:
                raise SingularKernelError(
                    f"{self.name}: non-positive pivot {pivot:.3g} at t={self._nodes[i]:.6g}")
            cells[i - 1] = (1.0 - np.dot(w[:-1], cells[:i - 1])) / pivot

        negative = int(np.sum(cells < 0))
        if negative:
            logger.warning(f"{self.name}: deconvolved l has {negative} negative cells")
        logger.debug(f"{self.name}: deconvolved l on {n} cells up to t={self.horizon:g}")
        return cells

    def _build_integrals(self) -> None:
        widths = np.diff(self._nodes)
        increments = self._cells * widths
        self._cumulative = np.concatenate(([0.0], np.cumsum(increments)))
        # exact integral of the piecewise linear 1*l
        trapezoids = widths * (self._cumulative[:-1] + 0.5 * increments)
        self._double_cumulative = np.concatenate(([0.0], np.cumsum(trapezoids)))

    def _build_interpolant(self) -> None:
        lower, upper = self._nodes[1:-1], self._nodes[2:]
        mids = np.sqrt(lower * upper) if self.mesh == "log" else 0.5 * (lower + upper)
        values = self._cells[1:]
        self._positive = bool(np.all(values > 0))
        self._mids = mids
        if self._positive:
            self._interpolant = PchipInterpolator(np.log(mids), np.log(values), extrapolate=True)
        else:
            self._interpolant = PchipInterpolator(mids, values, extrapolate=True)
        # l ~ t^(alpha_max - 1)/delta_max near the origin
        self._singular_exponent = self.alphas[-1] - 1.0

    def l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        first = self._mids[0]
        inner = t < first
        outer = ~inner
        if self._positive:
            out[outer] = np.exp(self._interpolant(np.log(t[outer])))
            anchor = np.exp(self._interpolant(np.log(first)))
        else:
            out[outer] = self._interpolant(t[outer])
            anchor = float(self._interpolant(first))
        out[inner] = anchor * (t[inner] / first) ** self._singular_exponent
        return out

    def _locate(self, t: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self._nodes, t, side="right") - 1
        return np.clip(index, 0, self.points - 1)

    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        index = self._locate(t)
        offset = t - self._nodes[index]
        return self._cumulative[index] + self._cells[index] * offset

    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        index = self._locate(t)
        offset = t - self._nodes[index]
        return (self._double_cumulative[index] + self._cumulative[index] * offset
                + 0.5 * self._cells[index] * offset ** 2)

    def discrete_residual(self, t_lo: float = 0.0, t_hi: Optional[float] = None) -> float:
        """max |sum_j w_ij l_j - 1| over mesh nodes in [t_lo, t_hi]"""
        t_hi = self.horizon if t_hi is None else t_hi
        worst = 0.0
        for i in range(1, self.points + 1):
            if not t_lo <= self._nodes[i] <= t_hi:
                continue
            residual = abs(np.dot(self._row_weights(i), self._cells[:i]) - 1.0)
            worst = max(worst, float(residual))
        return worst

    def to_dict(self) -> Dict[str, Any]:
        return {
            'family': 'fractional-sum',
            'alphas': list(self.alphas),
            'weights': list(self.weights),
            'horizon': self.horizon,
            'points': self.points,
            'mesh': self.mesh,
            't_floor': self.t_floor,
        }

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'FractionalSumPair':
        return cls(spec['alphas'], spec['weights'],
                   horizon=spec.get('horizon', 1e7),
                   points=spec.get('points'),
                   mesh=spec.get('mesh', 'log'),
                   t_floor=spec.get('t_floor', 1e-8))
