"""Single-joint articulated objects: a fixed base link and one movable link."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from ..shared.error_handling import ValidationError
from .geometry import RigidGeometry, RigidTransform, axis_angle_matrix

AXIS_TOLERANCE = 1e-9


class JointKind(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


@dataclass(frozen=True, eq=False)
class JointSpec:
    """Joint of an articulated object, expressed in the object frame.

    Attributes:
        kind: Revolute (radians) or prismatic (meters).
        axis: Unit direction of rotation or translation.
        pivot: Point on the rotation axis; ignored for prismatic joints.
        limits: Closed interval ``(lo, hi)`` with ``lo < hi``.
        state: Current joint value within ``limits``.
    """

    kind: JointKind
    axis: np.ndarray
    pivot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    limits: tuple[float, float] = (0.0, 1.0)
    state: float = 0.0

    def __post_init__(self) -> None:
        try:
            kind = JointKind(self.kind)
        except ValueError as exc:
            raise ValidationError(
                "kind must be 'revolute' or 'prismatic'",
                field_path="joint.kind",
                invalid_value=self.kind,
            ) from exc
        axis = np.array(self.axis, dtype=float)
        if axis.shape != (3,) or not np.all(np.isfinite(axis)):
            raise ValidationError("axis must be three finite numbers", field_path="joint.axis")
        if abs(float(np.linalg.norm(axis)) - 1.0) > AXIS_TOLERANCE:
            raise ValidationError(
                f"axis must be unit length (|axis| = {np.linalg.norm(axis):.6g})",
                field_path="joint.axis",
            )
        pivot = np.array(self.pivot, dtype=float)
        if pivot.shape != (3,) or not np.all(np.isfinite(pivot)):
            raise ValidationError("pivot must be three finite numbers", field_path="joint.pivot")
        if len(self.limits) != 2:
            raise ValidationError("limits must be [lo, hi]", field_path="joint.limits")
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
            raise ValidationError(
                f"limits must satisfy lo < hi (got [{lo}, {hi}])", field_path="joint.limits"
            )
        state = float(self.state)
        if not lo <= state <= hi:
            raise ValidationError(
                f"state {state} outside limits [{lo}, {hi}]", field_path="joint.state"
            )
        axis.setflags(write=False)
        pivot.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "pivot", pivot)
        object.__setattr__(self, "limits", (lo, hi))
        object.__setattr__(self, "state", state)

    @property
    def lower(self) -> float:
        return self.limits[0]

    @property
    def upper(self) -> float:
        return self.limits[1]

    def contains(self, s: float) -> bool:
        return self.limits[0] <= s <= self.limits[1]

    def clamp(self, s: float) -> float:
        return min(self.limits[1], max(self.limits[0], float(s)))

    def with_state(self, s: float) -> "JointSpec":
        return replace(self, state=float(s))

    def motion(self, s: float) -> RigidTransform:
        """Offset of the movable link in the object frame at joint value ``s``."""

        if self.kind is JointKind.PRISMATIC:
            return RigidTransform._trusted(np.eye(3), self.axis * float(s))
        rotation = axis_angle_matrix(self.axis, float(s))
        return RigidTransform._trusted(rotation, self.pivot - rotation @ self.pivot)

    def surface_velocity(self, point_object: np.ndarray) -> np.ndarray:
        """Velocity per unit ``ds`` of a movable-link point (object frame)."""

        if self.kind is JointKind.PRISMATIC:
            return np.broadcast_to(self.axis, np.shape(point_object)).copy()
        return np.cross(self.axis, np.asarray(point_object) - self.pivot)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "axis": self.axis.tolist(),
            "pivot": self.pivot.tolist(),
            "limits": list(self.limits),
            "state": self.state,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any], *, field_path: str = "joint") -> "JointSpec":
        if not isinstance(payload, Mapping):
            raise ValidationError("joint must be a mapping", field_path=field_path)
        try:
            axis = np.asarray(payload.get("axis"), dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError("axis must be numeric", field_path=f"{field_path}.axis") from exc
        if axis.shape != (3,):
            raise ValidationError(
                "axis must have three components", field_path=f"{field_path}.axis"
            )
        norm = float(np.linalg.norm(axis))
        if not math.isfinite(norm) or norm < 1e-12:
            raise ValidationError(
                "axis must be non-zero",
                field_path=f"{field_path}.axis",
                invalid_value=axis.tolist(),
            )
        limits = payload.get("limits")
        if not isinstance(limits, Sequence) or len(limits) != 2:
            raise ValidationError("limits must be [lo, hi]", field_path=f"{field_path}.limits")
        try:
            lo, hi = float(limits[0]), float(limits[1])
        except (TypeError, ValueError) as exc:
            raise ValidationError(
                "limits must be numbers", field_path=f"{field_path}.limits"
            ) from exc
        if lo >= hi:
            raise ValidationError(
                f"limits must satisfy lo < hi (got [{lo}, {hi}])",
                field_path=f"{field_path}.limits",
            )
        state = payload.get("state", lo)
        try:
            return cls(
                kind=payload.get("kind"),
                axis=axis / norm,
                pivot=payload.get("pivot", (0.0, 0.0, 0.0)),
                limits=(lo, hi),
                state=float(state),
            )
        except ValidationError as exc:
            suffix = (exc.field_path or "joint").split(".", 1)[-1]
            raise ValidationError(exc.message, field_path=f"{field_path}.{suffix}") from exc
        except (TypeError, ValueError) as exc:
            raise ValidationError(str(exc), field_path=field_path) from exc


# ============================================================================
# Articulated object
# ============================================================================

@dataclass(frozen=True, eq=False)
class ArticulatedObject:
    """Base link fixed to the world, movable link driven by one joint.

    Both links are compounds of rigid primitives expressed in the object
    frame; the movable link's parts are given at joint value zero.
    """

    base: tuple[RigidGeometry, ...]
    movable: tuple[RigidGeometry, ...]
    joint: JointSpec
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    name: str = ""
    category: str = ""

    def __post_init__(self) -> None:
        base = tuple(self.base)
        movable = tuple(self.movable)
        if not base:
            raise ValidationError(
                "base link needs at least one primitive", field_path="object.base"
            )
        if not movable:
            raise ValidationError(
                "movable link needs at least one primitive", field_path="object.movable"
            )
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "movable", movable)

    @property
    def state(self) -> float:
        return self.joint.state

    def with_state(self, s: float) -> "ArticulatedObject":
        return replace(self, joint=self.joint.with_state(s))

    def movable_pose(self, s: float) -> RigidTransform:
        return movable_pose(self, s)

    def world_axis(self) -> tuple[np.ndarray, np.ndarray]:
        """Joint axis direction and pivot in the world frame."""

        return self.pose.apply_vector(self.joint.axis), self.pose.apply(self.joint.pivot)

    @cached_property
    def movable_center_local(self) -> np.ndarray:
        """Volume-weighted center of the movable parts at joint value zero."""

        return _weighted_center(self.movable)

    @cached_property
    def base_center_local(self) -> np.ndarray:
        return _weighted_center(self.base)

    def movable_center(self, s: float) -> np.ndarray:
        """World position of the movable link's geometry center at ``s``."""

        return (self.pose @ self.joint.motion(s)).apply(self.movable_center_local)

    def base_center(self) -> np.ndarray:
        return self.pose.apply(self.base_center_local)

    def world_bounds(self, s: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned world bounds of both links at ``s`` (current state by default)."""

        value = self.state if s is None else s
        moving = self.pose @ self.joint.motion(value)
        points = [part.world_points(self.pose) for part in self.base]
        points += [part.world_points(moving) for part in self.movable]
        stacked = np.vstack(points)
        return stacked.min(axis=0), stacked.max(axis=0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "category": self.category,
            "pose": self.pose.to_dict(),
            "joint": self.joint.to_dict(),
            "base": [part.to_dict() for part in self.base],
            "movable": [part.to_dict() for part in self.movable],
        }

    @classmethod
    def from_dict(
        cls, payload: Mapping[str, Any], *, field_path: str = "object"
    ) -> "ArticulatedObject":
        if not isinstance(payload, Mapping):
            raise ValidationError("object must be a mapping", field_path=field_path)
        joint = JointSpec.from_dict(payload.get("joint"), field_path=f"{field_path}.joint")
        base_payload = payload.get("base")
        movable_payload = payload.get("movable")
        if not isinstance(base_payload, list) or not base_payload:
            raise ValidationError("base must be a non-empty list", field_path=f"{field_path}.base")
        if not isinstance(movable_payload, list) or not movable_payload:
            raise ValidationError(
                "movable must be a non-empty list", field_path=f"{field_path}.movable"
            )
        base = tuple(
            RigidGeometry.from_dict(item, field_path=f"{field_path}.base[{index}]")
            for index, item in enumerate(base_payload)
        )
        movable = tuple(
            RigidGeometry.from_dict(item, field_path=f"{field_path}.movable[{index}]")
            for index, item in enumerate(movable_payload)
        )
        return cls(
            base=base,
            movable=movable,
            joint=joint,
            pose=RigidTransform.from_dict(payload.get("pose"), field_path=f"{field_path}.pose"),
            name=str(payload.get("name", "")),
            category=str(payload.get("category", "")),
        )


def movable_pose(obj: ArticulatedObject, s: float) -> RigidTransform:
    """World pose of the movable link frame at joint value ``s``.

    At ``s = 0`` this is the object's rest pose; a revolute joint rotates by
    ``s`` about (axis, pivot) and a prismatic joint translates by ``s * axis``.
    """

    if not obj.joint.contains(s):
        raise ValidationError(
            f"joint value {s} outside limits {list(obj.joint.limits)}",
            field_path="joint.state",
        )
    return obj.pose @ obj.joint.motion(s)


def _weighted_center(parts: Sequence[RigidGeometry]) -> np.ndarray:
    weights = np.array([part.volume for part in parts])
    centers = np.array([part.pose.apply(part.local_center) for part in parts])
    total = float(weights.sum())
    if total <= 0.0:
        return centers.mean(axis=0)
    return (weights[:, None] * centers).sum(axis=0) / total
