"""Shared utilities: errors, configuration loading and observability."""

from .error_handling import (
    AffordanceError,
    ConfigurationError,
    DegenerateMotionError,
    DeskTwinError,
    ErrorContext,
    ErrorSeverity,
    HullError,
    InsufficientMotionError,
    NoExecutableActionError,
    PerceptionError,
    PlanningError,
    PlyFormatError,
    ReconstructionError,
    RegistrationError,
    SceneFormatError,
    ValidationError,
    format_error_for_display,
)

__all__ = [
    "AffordanceError",
    "ConfigurationError",
    "DegenerateMotionError",
    "DeskTwinError",
    "ErrorContext",
    "ErrorSeverity",
    "HullError",
    "InsufficientMotionError",
    "NoExecutableActionError",
    "PerceptionError",
    "PlanningError",
    "PlyFormatError",
    "ReconstructionError",
    "RegistrationError",
    "SceneFormatError",
    "ValidationError",
    "format_error_for_display",
]
