"""
Kernel pairs module for subdecay.

This module provides the PC kernel pairs (k, l) and their evaluators.
"""

from .base import KernelPair, eval_k, eval_l, eval_cumulative_l, kernel_rate
from .fractional import FractionalPair, riesz_kernel
from .fractional_sum import FractionalSumPair
from .ultraslow import UltraslowPair, SwitchedUltraslowPair, distributed_order_kernel
from .tabulated import TabulatedPair, HeatLimitPair, heat_limit_pair, load_kernel_csv
from .certificate import PairCertificate, verify_pair, ultraslow_log_threshold
from .factory import KernelPairFactory

__all__ = [
    'KernelPair',
    'eval_k',
    'eval_l',
    'eval_cumulative_l',
    'kernel_rate',
    'FractionalPair',
    'riesz_kernel',
    'FractionalSumPair',
    'UltraslowPair',
    'SwitchedUltraslowPair',
    'distributed_order_kernel',
    'TabulatedPair',
    'HeatLimitPair',
    'heat_limit_pair',
    'load_kernel_csv',
    'PairCertificate',
    'verify_pair',
    'ultraslow_log_threshold',
    'KernelPairFactory',
]
