#!/usr/bin/env python3
"""
Tabulated kernel pairs loaded from sampled k and l

Samples are linearly interpolated inside the grid; any query outside the
grid raises ExtrapolationError.  An optional point mass k_atom at t = 0
extends the class to the heat-equation limit k = delta_0, l = 1.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .base import KernelPair
from ..errors import DomainError
from ..utils.artifacts import read_csv

logger = logging.getLogger(__name__)

CSV_HEADER = ["t", "value"]


def load_kernel_csv(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """Read a `t,value` CSV with strictly increasing t"""
    try:
        header, values = read_csv(path)
    except (OSError, ValueError) as e:
        raise DomainError(f"Cannot read kernel table {path}: {e}")
    if header != CSV_HEADER:
        raise DomainError(f"Kernel table {path} must have header 't,value', got {','.join(header)}")
    return values[:, 0], values[:, 1]


class TabulatedPair(KernelPair):
    """Kernel pair defined by samples of k and l on a shared grid"""

    def __init__(self,
                 times: Sequence[float],
                 k_values: Sequence[float],
                 l_values: Sequence[float],
                 k_atom: float = 0.0,
                 name: str = "tabulated"):
        times = np.asarray(times, dtype=float)
        k_values = np.asarray(k_values, dtype=float)
        l_values = np.asarray(l_values, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise DomainError("A tabulated pair needs at least two sample times")
        if k_values.shape != times.shape or l_values.shape != times.shape:
            raise DomainError("k and l must be sampled on the shared time grid")
        if times[0] < 0 or np.any(np.diff(times) <= 0):
            raise DomainError("Sample times must be nonnegative and strictly increasing")
        if not (np.all(np.isfinite(k_values)) and np.all(np.isfinite(l_values))):
            raise DomainError("Tabulated kernels must be finite")
        if k_atom < 0:
            raise DomainError(f"Point mass of k must be nonnegative, got {k_atom}")

        super().__init__(name)
        self.times = times
        self.k_values = k_values
        self.l_values = l_values
        self._k_atom = float(k_atom)
        # Both kernels are held at their first sample on [0, t_0] when the grid starts after 0
        self._k_cumulative = self._trapezoid_table(k_values)
        self._cumulative = self._trapezoid_table(l_values)

        widths = np.diff(times)
        head = times[0] * l_values[0]
        second = widths * self._cumulative[:-1] + widths ** 2 * (2.0 * l_values[:-1] + l_values[1:]) / 6.0
        self._double_cumulative = 0.5 * times[0] * head + np.concatenate(([0.0], np.cumsum(second)))

    def _trapezoid_table(self, values: np.ndarray) -> np.ndarray:
        """Exact integrals of the interpolant from 0 to each sample time"""
        increments = 0.5 * np.diff(self.times) * (values[:-1] + values[1:])
        return self.times[0] * values[0] + np.concatenate(([0.0], np.cumsum(increments)))

    @property
    def k_atom(self) -> float:
        return self._k_atom

    def time_range(self):
        return float(self.times[0]), float(self.times[-1])

    def k(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.k_values)

    def l(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.l_values)

    def _locate(self, t: np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(index, 0, self.times.size - 2)

    def _integrate(self, t: np.ndarray, values: np.ndarray, table: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        head = t < self.times[0]
        out[head] = values[0] * t[head]
        rest = ~head
        index = self._locate(t[rest])
        offset = t[rest] - self.times[index]
        slope = (values[index + 1] - values[index]) / (self.times[index + 1] - self.times[index])
        out[rest] = table[index] + values[index] * offset + 0.5 * slope * offset ** 2
        return out

    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        return self._integrate(t, self.k_values, self._k_cumulative)

    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        return self._integrate(t, self.l_values, self._cumulative)

    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        head = t < self.times[0]
        out[head] = 0.5 * self.l_values[0] * t[head] ** 2
        rest = ~head
        index = self._locate(t[rest])
        offset = t[rest] - self.times[index]
        slope = (self.l_values[index + 1] - self.l_values[index]) / (self.times[index + 1] - self.times[index])
        out[rest] = (self._double_cumulative[index] + self._cumulative[index] * offset
                     + 0.5 * self.l_values[index] * offset ** 2 + slope * offset ** 3 / 6.0)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'family': 'tabulated',
            'name': self.name,
            'times': self.times,
            'k': self.k_values,
            'l': self.l_values,
            'k_atom': self._k_atom,
        }

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'TabulatedPair':
        if 'k_csv' in spec or 'l_csv' in spec:
            return cls.from_csv(spec['k_csv'], spec['l_csv'], k_atom=spec.get('k_atom', 0.0),
                                name=spec.get('name', 'tabulated'))
        return cls(spec['times'], spec['k'], spec['l'], k_atom=spec.get('k_atom', 0.0),
                   name=spec.get('name', 'tabulated'))

    @classmethod
    def from_csv(cls, k_path: str, l_path: str, k_atom: float = 0.0,
                 name: Optional[str] = None) -> 'TabulatedPair':
        """Load a pair from two `t,value` tables sharing one time grid"""
        k_times, k_values = load_kernel_csv(k_path)
        l_times, l_values = load_kernel_csv(l_path)
        if k_times.shape != l_times.shape or not np.array_equal(k_times, l_times):
            raise DomainError(f"{k_path} and {l_path} are not sampled on the same grid")
        logger.info(f"Loaded tabulated pair from {k_path} and {l_path} ({k_times.size} samples)")
        return cls(k_times, k_values, l_values, k_atom=k_atom, name=name or "tabulated")


class HeatLimitPair(TabulatedPair):
    """The alpha -> 1 limit k = delta_0, l = 1 (classical heat equation)"""

    def __init__(self, t_max: float = 1e9):
        super().__init__([0.0, t_max], [0.0, 0.0], [1.0, 1.0], k_atom=1.0, name="heat-limit")

    def relaxation(self, t: float, mu: np.ndarray) -> np.ndarray:
        return np.exp(-np.asarray(mu, dtype=float) * t)

    def to_dict(self) -> Dict[str, Any]:
        return {'family': 'heat-limit', 't_max': float(self.times[-1])}

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'HeatLimitPair':
        return cls(spec.get('t_max', 1e9))


def heat_limit_pair(t_max: float = 1e9) -> HeatLimitPair:
    return HeatLimitPair(t_max)
