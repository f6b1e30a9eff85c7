#!/usr/bin/env python3
"""
Distributed-order kernel pairs

The ultraslow pair has k = int_0^1 g_beta dbeta and l = e^t E1(t); the
switched pair exchanges the two.  Integrals over the order beta use a fixed
Gauss-Legendre rule, which is spectrally accurate because g_beta(t) is smooth
in beta.
"""

import logging
import math
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from .base import KernelPair
from ..special_functions import EULER_GAMMA, scaled_exp_integral
from ..utils.config import config
from ..utils.grids import gauss_legendre

logger = logging.getLogger(__name__)

# Rows evaluated per block of the (t, beta) outer product
_CHUNK = 65536

# Below this t the closed forms for (1*l) and (1*1*l) lose digits to cancellation
_SERIES_THRESHOLD = 0.1

# Terms of the small-t expansions; 0.1^16 is below double precision
_SERIES_TERMS = 16


def _series_coefficients(terms: int) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of e^t E1(t) = sum_j t^j (c_j - log(t)/j!)"""
    inverse_factorial = np.array([1.0 / math.factorial(j) for j in range(terms)])
    regular = np.empty(terms)
    for j in range(terms):
        regular[j] = -EULER_GAMMA * inverse_factorial[j] + sum(
            (-1.0) ** (n + 1) / (n * math.factorial(n)) * inverse_factorial[j - n] for n in range(1, j + 1))
    return regular, inverse_factorial


_REGULAR, _INVERSE_FACTORIAL = _series_coefficients(_SERIES_TERMS)


def distributed_order_kernel(t: np.ndarray, shift: float, nodes: int) -> np.ndarray:
    """int_0^1 g_{beta+shift}(t) dbeta for t > 0

    Args:
        t: Positive times
        shift: Offset added to the order (0 for k, 1 for 1*k, ...)
        nodes: Gauss-Legendre nodes in beta

    Returns:
        Integral values with the shape of t
    """
    beta, weights = gauss_legendre(nodes)
    order = beta + shift
    log_gamma = gammaln(order)
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        log_t = np.log(flat[start:start + _CHUNK])[:, None]
        out[start:start + _CHUNK] = np.exp((order - 1.0)[None, :] * log_t - log_gamma[None, :]) @ weights
    return out.reshape(t.shape)


def _ultraslow_cumulative(t: np.ndarray) -> np.ndarray:
    """(1*l)(t) for l = e^t E1(t)"""
    out = np.zeros_like(t)
    small = (t > 0) & (t < _SERIES_THRESHOLD)
    regular = t >= _SERIES_THRESHOLD
    ts = t[small][:, None]
    log_ts = np.log(ts)
    power = np.arange(1, _SERIES_TERMS + 1)[None, :]
    terms = ts ** power / power * (_REGULAR - _INVERSE_FACTORIAL * (log_ts - 1.0 / power))
    out[small] = terms.sum(axis=1)
    tr = t[regular]
    out[regular] = scaled_exp_integral(tr) + np.log(tr) + EULER_GAMMA
    return out


def _ultraslow_double_cumulative(t: np.ndarray) -> np.ndarray:
    """(1*1*l)(t) for l = e^t E1(t)"""
    out = np.zeros_like(t)
    small = (t > 0) & (t < _SERIES_THRESHOLD)
    regular = t >= _SERIES_THRESHOLD
    ts = t[small][:, None]
    log_ts = np.log(ts)
    power = np.arange(2, _SERIES_TERMS + 2)[None, :]
    terms = ts ** power / (power * (power - 1)) * (
        _REGULAR - _INVERSE_FACTORIAL * (log_ts - 1.0 / (power - 1) - 1.0 / power))
    out[small] = terms.sum(axis=1)
    tr = t[regular]
    out[regular] = _ultraslow_cumulative(tr) + tr * np.log(tr) - tr + EULER_GAMMA * tr
    return out


class UltraslowPair(KernelPair):
    """Ultraslow (distributed-order) pair: k = int_0^1 g_beta dbeta, l = e^t E1(t)"""

    def __init__(self, nodes: Optional[int] = None):
        super().__init__("ultraslow")
        self.nodes = int(nodes or config.get_resolution("gauss_legendre_nodes"))

    def k(self, t: np.ndarray) -> np.ndarray:
        return distributed_order_kernel(t, 0.0, self.nodes)

    def l(self, t: np.ndarray) -> np.ndarray:
        return scaled_exp_integral(t)

    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        positive = t > 0
        out[positive] = distributed_order_kernel(t[positive], 1.0, self.nodes)
        return out

    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        return _ultraslow_cumulative(np.asarray(t, dtype=float))

    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        return _ultraslow_double_cumulative(np.asarray(t, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        return {'family': 'ultraslow', 'nodes': self.nodes}

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'UltraslowPair':
        return cls(spec.get('nodes'))


class SwitchedUltraslowPair(KernelPair):
    """The ultraslow pair with k and l exchanged: k = e^t E1(t), l = int_0^1 g_beta dbeta"""

    def __init__(self, nodes: Optional[int] = None):
        super().__init__("switched-ultraslow")
        self.nodes = int(nodes or config.get_resolution("gauss_legendre_nodes"))

    def k(self, t: np.ndarray) -> np.ndarray:
        return scaled_exp_integral(t)

    def l(self, t: np.ndarray) -> np.ndarray:
        return distributed_order_kernel(t, 0.0, self.nodes)

    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        return _ultraslow_cumulative(np.asarray(t, dtype=float))

    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        positive = t > 0
        out[positive] = distributed_order_kernel(t[positive], 1.0, self.nodes)
        return out

    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        positive = t > 0
        out[positive] = distributed_order_kernel(t[positive], 2.0, self.nodes)
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {'family': 'switched-ultraslow', 'nodes': self.nodes}

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'SwitchedUltraslowPair':
        return cls(spec.get('nodes'))
