#!/usr/bin/env python3
"""
Time-fractional kernel pair k = g_{1-alpha}, l = g_alpha
"""

import logging
from typing import Any, Dict

import numpy as np
from scipy.special import gammaln

from .base import KernelPair
from ..errors import DomainError
from ..special_functions import mittag_leffler_neg

logger = logging.getLogger(__name__)


def riesz_kernel(beta: float, t: np.ndarray) -> np.ndarray:
    """g_beta(t) = t^(beta-1)/Gamma(beta) for t > 0, evaluated in log space

    Zero is returned at t = 0 when beta > 1 (the kernel vanishes there).
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp((beta - 1.0) * np.log(t[positive]) - gammaln(beta))
    if beta == 1.0:
        out[~positive] = 1.0
    return out


class FractionalPair(KernelPair):
    """Caputo pair of order alpha in (0, 1)"""

    closed_form = True

    def __init__(self, alpha: float):
        if not 0 < alpha < 1:
            raise DomainError(f"Fractional order must lie in (0, 1), got {alpha}")
        super().__init__(f"fractional(alpha={alpha:g})")
        self.alpha = float(alpha)

    def k(self, t: np.ndarray) -> np.ndarray:
        return riesz_kernel(1.0 - self.alpha, t)

    def l(self, t: np.ndarray) -> np.ndarray:
        return riesz_kernel(self.alpha, t)

    def cumulative_k(self, t: np.ndarray) -> np.ndarray:
        return riesz_kernel(2.0 - self.alpha, t)

    def cumulative_l(self, t: np.ndarray) -> np.ndarray:
        return riesz_kernel(1.0 + self.alpha, t)

    def double_cumulative_l(self, t: np.ndarray) -> np.ndarray:
        return riesz_kernel(2.0 + self.alpha, t)

    def relaxation(self, t: float, mu: np.ndarray) -> np.ndarray:
        return mittag_leffler_neg(self.alpha, np.asarray(mu, dtype=float) * t ** self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        return {'family': 'fractional', 'alpha': self.alpha}

    @classmethod
    def from_dict(cls, spec: Dict[str, Any]) -> 'FractionalPair':
        return cls(spec['alpha'])
