from __future__ import annotations

import logging

import pytest

from desktwin.shared.error_handling import (
    ConfigurationError,
    DeskTwinError,
    ErrorContext,
    ErrorSeverity,
    InsufficientMotionError,
    NoExecutableActionError,
    ReconstructionError,
    RegistrationError,
    ValidationError,
    format_error_for_display,
)


def test_validation_error_carries_field_path_and_value() -> None:
    error = ValidationError(
        "axis must be non-zero", field_path="object.joint.axis", invalid_value=[0, 0, 0]
    )

    assert isinstance(error, ValueError)
    assert error.context["field_path"] == "object.joint.axis"
    assert error.context["invalid_value"] == "[0, 0, 0]"
    assert error.message.startswith("object.joint.axis:")
    assert "object.joint.axis" in error.user_message


def test_configuration_error_defaults_to_critical() -> None:
    error = ConfigurationError("bad section")

    assert error.severity is ErrorSeverity.CRITICAL
    assert error.to_dict()["severity"] == "critical"
    assert format_error_for_display(error).startswith("Configuration error.")


def test_reconstruction_errors_record_their_measurements() -> None:
    motion = InsufficientMotionError("nothing moved", moved0=3, moved1=4)
    registration = RegistrationError("no convergence", final_residual=0.25)

    assert isinstance(motion, ReconstructionError)
    assert motion.context == {"moved0": 3, "moved1": 4}
    assert registration.context["final_residual"] == 0.25
    assert "every candidate push" in NoExecutableActionError("x").user_message


def test_error_context_records_and_reraises(caplog: pytest.LogCaptureFixture) -> None:
    context = ErrorContext("reconstruct")

    with caplog.at_level(logging.ERROR):
        with pytest.raises(InsufficientMotionError):
            with context:
                raise InsufficientMotionError("nothing moved")

    summary = context.get_summary()
    assert summary["operation"] == "reconstruct"
    assert summary["error_count"] == 1
    assert summary["errors"][0]["type"] == "InsufficientMotionError"
    assert "InsufficientMotionError" in caplog.text


def test_error_context_wraps_foreign_exceptions_and_can_suppress() -> None:
    context = ErrorContext("plan", suppress=True)

    with context:
        raise RuntimeError("boom")

    assert context.has_errors()
    wrapped = context.errors[0]
    assert isinstance(wrapped, DeskTwinError)
    assert wrapped.context == {"operation": "plan"}
    assert isinstance(wrapped.cause, RuntimeError)


def test_format_error_for_display_handles_foreign_errors() -> None:
    assert format_error_for_display(KeyError("x")).startswith("An unexpected error occurred")
