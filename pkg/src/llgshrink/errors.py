"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "LLGShrinkError",
    "ParameterError",
    "IntegrationError",
    "BudgetExceededError",
    "DefectError",
    "RangeError",
    "ExtractionError",
    "DegenerateGeometryError",
]


class LLGShrinkError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(LLGShrinkError, ValueError):
    """A parameter is outside its documented domain."""


class IntegrationError(LLGShrinkError, RuntimeError):
    """The ODE integration failed."""


class BudgetExceededError(IntegrationError):
    """The integration exceeded its right-hand-side evaluation budget."""


class DefectError(IntegrationError):
    """A conserved quantity drifted beyond the abort threshold."""


class RangeError(LLGShrinkError, ValueError):
    """A requested evaluation point lies outside the computed range.

    Attributes
    ----------
    required_x_max : float
        Smallest ``x_max`` that would cover the requested point.
    """

    def __init__(self, message: str, required_x_max: float):
        super().__init__(message)
        self.required_x_max = float(required_x_max)


class ExtractionError(LLGShrinkError, RuntimeError):
    """Limit-constant extraction could not certify the requested accuracy."""


class DegenerateGeometryError(LLGShrinkError, ValueError):
    """The limit geometry is too degenerate to build (|B| far from 1)."""
