"""Screw decomposition of a relative rigid transform and joint classification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from ..model.articulation import JointKind
from ..model.geometry import ORTHONORMAL_TOLERANCE, RigidTransform, axis_angle_matrix
from ..shared.error_handling import DegenerateMotionError, ValidationError

THETA_MIN = math.radians(3.0)
# Below this angle the rotation axis is numerically meaningless.
ROTATION_EPS = 1e-9
TRANSLATION_EPS = 1e-9
LOW_CONFIDENCE_BAND = 0.25


@dataclass(frozen=True, eq=False)
class ScrewMotion:
    """Rotation ``theta`` about the line (``point``, ``direction``) plus a slide along it."""

    direction: np.ndarray
    point: np.ndarray
    theta: float
    translation: float

    def __post_init__(self) -> None:
        direction = np.array(self.direction, dtype=float)
        if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-9:
            raise ValidationError(
                "screw direction must be unit length", field_path="screw.direction"
            )
        if not 0.0 <= self.theta <= math.pi:
            raise ValidationError("screw angle must lie in [0, pi]", field_path="screw.theta")
        point = np.array(self.point, dtype=float)
        direction.setflags(write=False)
        point.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "point", point)

    def to_transform(self) -> RigidTransform:
        rotation = axis_angle_matrix(self.direction, self.theta)
        translation = self.point - rotation @ self.point + self.translation * self.direction
        return RigidTransform._trusted(rotation, translation)


def screw_decompose(T: RigidTransform) -> ScrewMotion:
    """Decompose ``T`` into a screw about an axis through the point closest to the origin.

    Raises:
        ValidationError: The rotation part is not orthonormal.
        DegenerateMotionError: ``T`` carries neither rotation nor translation.
    """

    R = np.asarray(T.rotation, dtype=float)
    t = np.asarray(T.translation, dtype=float)
    if not np.allclose(R @ R.T, np.eye(3), atol=ORTHONORMAL_TOLERANCE) or np.linalg.det(R) < 0.0:
        raise ValidationError("rotation must be orthonormal", field_path="transform.rotation")

    rotvec = Rotation.from_matrix(R).as_rotvec()
    theta = float(np.linalg.norm(rotvec))
    if theta < ROTATION_EPS:
        distance = float(np.linalg.norm(t))
        if distance < TRANSLATION_EPS:
            raise DegenerateMotionError(
                "transform carries no motion", context={"translation": t.tolist()}
            )
        return ScrewMotion(t / distance, np.zeros(3), 0.0, distance)

    direction = rotvec / theta
    theta = min(theta, math.pi)
    along = float(t @ direction)
    if theta > math.pi - 1e-9 and along < 0.0:
        direction = -direction
        along = -along
    t_perp = t - along * direction
    # (I - R) has rank two; the minimum-norm solution is orthogonal to the axis.
    point, *_ = np.linalg.lstsq(np.eye(3) - R, t_perp, rcond=None)
    point = point - (point @ direction) * direction
    return ScrewMotion(direction, point, theta, along)


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """Joint recovered from one observed motion.

    ``displacement`` is the observed motion along ``axis`` (meters or radians),
    positive by construction before any sign convention is applied.
    """

    kind: JointKind
    axis: np.ndarray
    pivot: np.ndarray
    displacement: float
    low_confidence: bool

    def flipped(self) -> "JointEstimate":
        return JointEstimate(
            self.kind, -self.axis, self.pivot, -self.displacement, self.low_confidence
        )


def classify_joint(screw: ScrewMotion, theta_min: float = THETA_MIN) -> JointEstimate:
    """Prismatic below ``theta_min``, revolute at or above it."""

    band = LOW_CONFIDENCE_BAND * theta_min
    low_confidence = abs(screw.theta - theta_min) <= band
    if screw.theta >= theta_min:
        return JointEstimate(
            JointKind.REVOLUTE, screw.direction, screw.point, screw.theta, low_confidence
        )
    translation = screw.to_transform().translation
    distance = float(np.linalg.norm(translation))
    if distance < TRANSLATION_EPS:
        # A sub-threshold spin in place: no usable translation direction.
        return JointEstimate(JointKind.PRISMATIC, screw.direction, np.zeros(3), 0.0, True)
    return JointEstimate(
        JointKind.PRISMATIC, translation / distance, np.zeros(3), distance, low_confidence
    )
