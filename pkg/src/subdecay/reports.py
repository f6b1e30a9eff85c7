#!/usr/bin/env python3
"""
Claim reports returned by every check operation
"""

import logging
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class ClaimReport:
    """Verdict of a numerical claim together with what was measured"""

    def __init__(self,
                 claim: str,
                 passed: bool,
                 measured: Optional[Dict[str, Any]] = None,
                 target: Any = None,
                 tolerance: Optional[float] = None,
                 details: Optional[Dict[str, Any]] = None):
        """Initialize a report

        Args:
            claim: Short claim identifier (e.g. "smu-bounds")
            passed: Whether the claim holds within tolerance
            measured: Measured quantities
            target: Expected value, if the claim has one
            tolerance: Tolerance the claim was judged with
            details: Bulky diagnostics (violation lists, trend data)
        """
        self.claim = claim
        self.passed = bool(passed)
        self.measured = measured or {}
        self.target = target
        self.tolerance = tolerance
        self.details = details or {}

    def log(self) -> 'ClaimReport':
        """Log the verdict and return self"""
        if self.passed:
            logger.info(f"Claim {self.claim}: passed")
        else:
            logger.warning(f"Claim {self.claim}: FAILED ({self.measured})")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'claim': self.claim,
            'passed': self.passed,
            'measured': self.measured,
        }
        if self.target is not None:
            data['target'] = self.target
        if self.tolerance is not None:
            data['tolerance'] = self.tolerance
        if self.details:
            data['details'] = self.details
        return data

    def __str__(self) -> str:
        return f"{self.claim}: {'pass' if self.passed else 'FAIL'}"
