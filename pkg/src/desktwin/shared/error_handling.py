"""Exception hierarchy for the desktwin pipeline.

Every stage raises a subclass of :class:`DeskTwinError`. Errors carry a
severity that picks their log level, a context mapping that ends up in
episode records, and a short message for the command line. Validation
errors name the offending field (``object.joint.axis``).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


# ============================================================================
# Severity
# ============================================================================

class ErrorSeverity(str, Enum):
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


_LEVEL_MAP = {
    ErrorSeverity.WARNING: logging.WARNING,
    ErrorSeverity.ERROR: logging.ERROR,
    ErrorSeverity.CRITICAL: logging.CRITICAL,
}


# ============================================================================
# Base Exception
# ============================================================================

class DeskTwinError(Exception):
    """Base class of every error raised by desktwin.

    Args:
        message: Technical message, used for logs.
        severity: Log level of :meth:`log`.
        user_message: CLI text; subclasses derive one from ``message`` when omitted.
        context: JSON-friendly details (counts, residuals, field paths).
        cause: Foreign exception wrapped by this one.
    """

    def __init__(
        self,
        message: str,
        severity: ErrorSeverity = ErrorSeverity.ERROR,
        user_message: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
        cause: Optional[BaseException] = None,
    ):
        super().__init__(message)
        self.message = message
        self.severity = severity
        self.context = context or {}
        self.cause = cause
        self.user_message = user_message or self._generate_user_message()

    def _generate_user_message(self) -> str:
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "type": type(self).__name__,
            "message": self.message,
            "severity": self.severity.value,
            "context": dict(self.context),
        }
        if self.cause is not None:
            payload["cause"] = repr(self.cause)
        return payload

    def log(self, target: Optional[logging.Logger] = None) -> None:
        (target or logger).log(
            _LEVEL_MAP[self.severity],
            "%s: %s",
            type(self).__name__,
            self.message,
            extra={"error_context": self.context},
        )


# ============================================================================
# Validation and Configuration
# ============================================================================

class ValidationError(DeskTwinError, ValueError):
    """Invariant violation on a named field of a scene, twin or config payload."""

    def __init__(
        self,
        message: str,
        field_path: Optional[str] = None,
        invalid_value: Any = None,
        **kwargs: Any,
    ):
        context = kwargs.pop("context", {})
        if field_path:
            context["field_path"] = field_path
        if invalid_value is not None:
            context["invalid_value"] = str(invalid_value)
        self.field_path = field_path
        if field_path and field_path not in message:
            message = f"{field_path}: {message}"
        super().__init__(message, context=context, **kwargs)

    def _generate_user_message(self) -> str:
        field_path = getattr(self, "field_path", None) or "field"
        return f"Invalid value for {field_path}. {self.message}"


class SceneFormatError(ValidationError):
    """A scene, twin, tool or URDF document could not be parsed."""


class ConfigurationError(DeskTwinError, ValueError):
    """Errors related to configuration files and overrides."""

    def __init__(self, message: str, **kwargs: Any):
        kwargs.setdefault("severity", ErrorSeverity.CRITICAL)
        super().__init__(message, **kwargs)

    def _generate_user_message(self) -> str:
        return f"Configuration error. {self.message}"


# ============================================================================
# Pipeline Stage Errors
# ============================================================================

class PerceptionError(DeskTwinError):
    """Rendering, cropping or point-cloud I/O failed."""


class PlyFormatError(PerceptionError, ValueError):
    """Malformed PLY header or unsupported vertex properties."""


class AffordanceError(DeskTwinError):
    """Interactive-perception stage failed."""


class NoExecutableActionError(AffordanceError):
    """Every candidate push failed the reachability or collision checks."""

    def _generate_user_message(self) -> str:
        return "No executable action: every candidate push is unreachable or collides."


class ReconstructionError(DeskTwinError):
    """Twin construction failed."""


class InsufficientMotionError(ReconstructionError):
    """Too few points moved between the two observations."""

    def __init__(self, message: str, moved0: int = 0, moved1: int = 0, **kwargs: Any):
        context = kwargs.pop("context", {})
        context.update({"moved0": moved0, "moved1": moved1})
        self.moved0 = moved0
        self.moved1 = moved1
        super().__init__(message, context=context, **kwargs)


class DegenerateMotionError(ReconstructionError):
    """The relative transform carries neither rotation nor translation."""


class RegistrationError(ReconstructionError):
    """Iterative closest point did not converge."""

    def __init__(self, message: str, final_residual: float, **kwargs: Any):
        context = kwargs.pop("context", {})
        context["final_residual"] = final_residual
        self.final_residual = final_residual
        super().__init__(message, context=context, **kwargs)


class HullError(ReconstructionError):
    """A link hull cannot be formed from the available points."""


class PlanningError(DeskTwinError, ValueError):
    """Planner inputs are degenerate (for example a zero target displacement)."""


# ============================================================================
# Stage Collection
# ============================================================================

@dataclass
class ErrorContext:
    """Record the error that ends a pipeline stage.

    Errors pass through unless ``suppress`` is set; foreign exceptions are
    recorded wrapped in a :class:`DeskTwinError` tagged with the stage name::

        stage = ErrorContext("interact")
        try:
            with stage:
                push_and_observe()
        except AffordanceError:
            record(stage.get_summary())
    """

    operation: str
    errors: list[DeskTwinError] = field(default_factory=list)
    suppress: bool = False

    def __enter__(self) -> "ErrorContext":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        if not isinstance(exc_val, Exception):
            return False
        if not isinstance(exc_val, DeskTwinError):
            exc_val = DeskTwinError(
                str(exc_val), cause=exc_val, context={"operation": self.operation}
            )
        self.add_error(exc_val)
        return self.suppress

    def add_error(self, error: DeskTwinError) -> None:
        self.errors.append(error)
        error.log()

    def has_errors(self) -> bool:
        return bool(self.errors)

    def get_summary(self) -> Dict[str, Any]:
        return {
            "operation": self.operation,
            "error_count": len(self.errors),
            "errors": [error.to_dict() for error in self.errors],
        }


def format_error_for_display(error: BaseException) -> str:
    if isinstance(error, DeskTwinError):
        return error.user_message
    return f"An unexpected error occurred: {error}"
