#!/usr/bin/env python3
"""
Kernel pair factory implementation
"""

import logging
from typing import Any, Dict, List

from .base import KernelPair
from .fractional import FractionalPair
from .fractional_sum import FractionalSumPair
from .ultraslow import UltraslowPair, SwitchedUltraslowPair
from .tabulated import HeatLimitPair, TabulatedPair
from ..errors import ConfigError, DomainError

logger = logging.getLogger(__name__)


class KernelPairFactory:
    """Factory for creating kernel pairs from spec dicts"""

    families = {
        'fractional': FractionalPair,
        'fractional-sum': FractionalSumPair,
        'ultraslow': UltraslowPair,
        'switched-ultraslow': SwitchedUltraslowPair,
        'tabulated': TabulatedPair,
        'heat-limit': HeatLimitPair,
    }

    @staticmethod
    def create(spec: Dict[str, Any]) -> KernelPair:
        """Create a pair from a spec such as {"family": "fractional", "alpha": 0.5}

        Raises:
            ConfigError: unknown family, missing or invalid parameters
        """
        if not isinstance(spec, dict) or 'family' not in spec:
            raise ConfigError("Kernel pair spec must be an object with a 'family'", field="pair.family")
        family = spec['family']
        cls = KernelPairFactory.families.get(family)
        if cls is None:
            known = ", ".join(sorted(KernelPairFactory.families))
            raise ConfigError(f"Unknown kernel family {family!r} (known: {known})", field="pair.family")
        try:
            pair = cls.from_dict(spec)
        except KeyError as e:
            raise ConfigError(f"Missing parameter {e} for {family} pair", field=f"pair.{e.args[0]}")
        except DomainError as e:
            raise ConfigError(f"Invalid {family} pair: {e}", field="pair")
        logger.debug(f"Created kernel pair {pair.name}")
        return pair

    @staticmethod
    def create_builtin() -> List[KernelPair]:
        """Create one instance of every built-in pair family (used by the bounds suite)"""
        pairs = []
        specs = [
            {'family': 'fractional', 'alpha': 0.5},
            {'family': 'fractional-sum', 'alphas': [0.3, 0.7], 'weights': [1.0, 1.0]},
            {'family': 'ultraslow'},
            {'family': 'switched-ultraslow'},
        ]
        for spec in specs:
            try:
                pairs.append(KernelPairFactory.create(spec))
            except Exception as e:
                logger.error(f"Error creating kernel pair {spec['family']}: {e}")
        return pairs
