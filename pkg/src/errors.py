"""
Error taxonomy for the Friedrichs decay toolkit.

Every failure raised by the library carries an ErrorCategory so the command
line front end can translate it into an exit code without inspecting
messages.
"""

from enum import Enum
from typing import Any, Dict, Optional


class ErrorCategory(str, Enum):
    """Category of error for exit-code classification"""
    VALIDATION = "validation"  # Bad input, bad config, violated precondition
    NUMERICAL = "numerical"  # Quadrature, linear algebra or root finding failed


EXIT_CODES: Dict[ErrorCategory, int] = {
    ErrorCategory.VALIDATION: 1,
    ErrorCategory.NUMERICAL: 2,
}


class FriedrichsError(Exception):
    """Base class for all toolkit errors"""

    category: ErrorCategory = ErrorCategory.NUMERICAL

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.category]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "category": self.category.value,
            "message": self.message,
            "details": self.details,
        }


# --- Validation family -----------------------------------------------------

class ValidationError(FriedrichsError):
    category = ErrorCategory.VALIDATION


class ParseError(ValidationError):
    """Configuration text could not be parsed or contains unknown keys"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        full = f"{message} ({', '.join(location)})" if location else message
        super().__init__(full, {"field": field, "line": line})
        self.field = field
        self.line = line


class ZeroVector(ValidationError):
    pass


class AllZeroAmplitudes(ValidationError):
    pass


class OnCut(ValidationError):
    pass


class DegenerateChi(ValidationError):
    pass


class HeisenbergGuard(ValidationError):
    """Comparison requested beyond the discretization's Heisenberg time"""


# --- Numerical family ------------------------------------------------------

class QuadratureFailure(FriedrichsError):
    pass


class SingularLimit(FriedrichsError):
    pass


class SingularSystem(FriedrichsError):
    pass


class CalibrationFailure(FriedrichsError):
    pass


class NoRoot(FriedrichsError):
    pass


class BudgetExceeded(FriedrichsError):
    """Evaluation budget exhausted; `partial` holds whatever was computed"""

    def __init__(self, message: str, partial: Any = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.partial = partial
