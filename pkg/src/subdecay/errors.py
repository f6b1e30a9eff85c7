#!/usr/bin/env python3
"""
Exception hierarchy for subdecay

Check operations report failed claims in their report objects; the exceptions
below are reserved for calls that cannot produce a meaningful answer.
"""

from typing import Any, Dict, Optional, Sequence


class SubdecayError(Exception):
    """Base class for all toolkit errors"""


class DomainError(SubdecayError, ValueError):
    """Argument outside the domain of an operation"""


class ExtrapolationError(DomainError):
    """Query outside the range covered by tabulated or solved data"""

    def __init__(self, message: str, value: float, lower: float, upper: float):
        super().__init__(message)
        self.value = value
        self.lower = lower
        self.upper = upper


class SingularKernelError(SubdecayError):
    """Kernel deconvolution produced a non-positive pivot"""


class SolverError(SubdecayError):
    """Internal failure of a time-marching or nonlinear solver"""


class SchemeViolationError(SolverError):
    """A discrete scheme lost positivity or monotonicity"""


class ResolutionError(SubdecayError):
    """Discretization too coarse or too small for the requested accuracy"""


class DomainTooSmallError(ResolutionError):
    """Spatial box too small for the datum; carries the suggested extent"""

    def __init__(self, message: str, suggested_extent: float):
        super().__init__(message)
        self.suggested_extent = suggested_extent


class TruncationError(ResolutionError):
    """Truncated integral whose neglected tail exceeds its tolerance"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ProfileError(SubdecayError):
    """Radial profile lacks a property an operation relies on"""


class StencilError(SubdecayError):
    """Finite-difference stencil does not fit its admissible interval"""


class PreconditionError(SubdecayError):
    """Inputs do not satisfy the smoothness or structure an operation needs"""


class HypothesisError(PreconditionError):
    """A theorem hypothesis is violated by the supplied data"""

    def __init__(self, message: str, hypothesis: str):
        super().__init__(message)
        self.hypothesis = hypothesis


class ConfigError(SubdecayError):
    """Experiment configuration could not be parsed or validated"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def __str__(self) -> str:
        location = []
        if self.line is not None:
            location.append(f"line {self.line}")
        if self.field:
            location.append(f"field '{self.field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        return f"{prefix}{super().__str__()}"


class MissingArtifactError(SubdecayError):
    """An artifact directory lacks files a report needs"""

    def __init__(self, message: str, missing: Sequence[str]):
        super().__init__(message)
        self.missing = list(missing)
