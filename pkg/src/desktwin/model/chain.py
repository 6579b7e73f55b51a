"""Serial robot chains with a spherical fingertip and an optional rigid tool."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from ..shared.error_handling import ValidationError
from .articulation import JointKind
from .geometry import GeometryKind, RigidGeometry, RigidTransform, _vector

DEFAULT_FINGERTIP_RADIUS = 0.01


@dataclass(frozen=True, eq=False)
class ChainJoint:
    """One actuated joint; ``origin`` places it relative to the previous link."""

    name: str
    kind: JointKind
    axis: np.ndarray
    limits: tuple[float, float]
    origin: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self) -> None:
        kind = JointKind(self.kind)
        axis = np.array(self.axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if axis.shape != (3,) or norm < 1e-12:
            raise ValidationError(
                "axis must be a non-zero 3-vector", field_path=f"robot.{self.name}.axis"
            )
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if lo >= hi:
            raise ValidationError(
                "limits must satisfy lo < hi", field_path=f"robot.{self.name}.limits"
            )
        axis = axis / norm
        axis.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "limits", (lo, hi))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "axis": self.axis.tolist(),
            "limits": list(self.limits),
            "origin": self.origin.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class ToolAttachment:
    """Rigid tool mounted at the fingertip.

    ``parts`` are expressed in the tool frame, ``grasp`` places the tool frame
    relative to the fingertip mount and ``tip`` is the working point used as
    the grasp center by the planner.
    """

    parts: tuple[RigidGeometry, ...]
    grasp: RigidTransform = field(default_factory=RigidTransform.identity)
    tip: np.ndarray = field(default_factory=lambda: np.zeros(3))
    name: str = "tool"

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        for part in parts:
            if part.kind not in (GeometryKind.BOX, GeometryKind.SPHERE):
                raise ValidationError(
                    "tool parts must be boxes or spheres",
                    field_path=f"tool.{part.name or part.kind.value}",
                )
        tip = np.array(self.tip, dtype=float)
        tip.setflags(write=False)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "tip", tip)

    @cached_property
    def spheres(self) -> np.ndarray:
        """Sphere proxies ``(k, 4)`` of every part, in the tool frame."""

        if not self.parts:
            return np.zeros((0, 4))
        return np.vstack([part.collision_spheres() for part in self.parts])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "grasp": self.grasp.to_dict(),
            "tip": self.tip.tolist(),
            "parts": [part.to_dict() for part in self.parts],
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any], *, field_path: str = "tool") -> "ToolAttachment":
        if not isinstance(payload, Mapping):
            raise ValidationError("tool must be a mapping", field_path=field_path)
        parts_payload = payload.get("parts")
        if not isinstance(parts_payload, list) or not parts_payload:
            raise ValidationError(
                "parts must be a non-empty list", field_path=f"{field_path}.parts"
            )
        parts = tuple(
            RigidGeometry.from_dict(item, field_path=f"{field_path}.parts[{index}]")
            for index, item in enumerate(parts_payload)
        )
        return cls(
            parts=parts,
            grasp=RigidTransform.from_dict(payload.get("grasp"), field_path=f"{field_path}.grasp"),
            tip=_vector(payload.get("tip", (0.0, 0.0, 0.0)), f"{field_path}.tip"),
            name=str(payload.get("name", "tool")),
        )


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Serial chain anchored at ``base_pose`` in the world.

    Attributes:
        joints: Ordered joints; ``d = len(joints)``.
        base_pose: World pose of the chain root.
        fingertip_radius: Radius of the fingertip sphere.
        fingertip_offset: Fingertip mount frame relative to the last link.
        link_spheres: Optional collision spheres ``(k, 4)`` per link frame.
        tool: Tool rigidly attached at the fingertip mount, if any.
    """

    joints: tuple[ChainJoint, ...]
    base_pose: RigidTransform = field(default_factory=RigidTransform.identity)
    fingertip_radius: float = DEFAULT_FINGERTIP_RADIUS
    fingertip_offset: RigidTransform = field(default_factory=RigidTransform.identity)
    link_spheres: tuple[np.ndarray, ...] = ()
    tool: ToolAttachment | None = None
    name: str = "robot"

    def __post_init__(self) -> None:
        joints = tuple(self.joints)
        if not joints:
            raise ValidationError("chain needs at least one joint", field_path="robot.joints")
        if self.fingertip_radius <= 0.0:
            raise ValidationError(
                "fingertip radius must be positive", field_path="robot.fingertip_radius"
            )
        spheres = tuple(np.array(item, dtype=float).reshape(-1, 4) for item in self.link_spheres)
        if spheres and len(spheres) != len(joints):
            raise ValidationError(
                "link_spheres needs one entry per joint", field_path="robot.link_spheres"
            )
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "link_spheres", spheres)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([joint.limits[0] for joint in self.joints])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([joint.limits[1] for joint in self.joints])

    def within_limits(self, q: np.ndarray, tolerance: float = 1e-12) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(
            q.shape == (self.dof,)
            and np.all(q >= self.lower - tolerance)
            and np.all(q <= self.upper + tolerance)
        )

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(q, dtype=float), self.lower, self.upper)

    def with_tool(self, tool: ToolAttachment | None) -> "KinematicChain":
        return replace(self, tool=tool)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "name": self.name,
            "base_pose": self.base_pose.to_dict(),
            "fingertip_radius": self.fingertip_radius,
            "fingertip_offset": self.fingertip_offset.to_dict(),
            "joints": [joint.to_dict() for joint in self.joints],
        }
        if self.link_spheres:
            payload["link_spheres"] = [item.tolist() for item in self.link_spheres]
        if self.tool is not None:
            payload["tool"] = self.tool.to_dict()
        return payload

    @classmethod
    def from_dict(
        cls, payload: Mapping[str, Any], *, field_path: str = "robot"
    ) -> "KinematicChain":
        if not isinstance(payload, Mapping):
            raise ValidationError("robot must be a mapping", field_path=field_path)
        joints_payload = payload.get("joints")
        if not isinstance(joints_payload, list) or not joints_payload:
            raise ValidationError(
                "joints must be a non-empty list", field_path=f"{field_path}.joints"
            )
        joints = []
        for index, item in enumerate(joints_payload):
            path = f"{field_path}.joints[{index}]"
            if not isinstance(item, Mapping):
                raise ValidationError("joint must be a mapping", field_path=path)
            limits = item.get("limits")
            if not isinstance(limits, Sequence) or len(limits) != 2:
                raise ValidationError("limits must be [lo, hi]", field_path=f"{path}.limits")
            try:
                joints.append(
                    ChainJoint(
                        name=str(item.get("name", f"joint{index}")),
                        kind=item.get("kind"),
                        axis=_vector(item.get("axis"), f"{path}.axis"),
                        limits=(float(limits[0]), float(limits[1])),
                        origin=RigidTransform.from_dict(
                            item.get("origin"), field_path=f"{path}.origin"
                        ),
                    )
                )
            except ValidationError as exc:
                suffix = (exc.field_path or "").split(".")[-1]
                raise ValidationError(exc.message, field_path=f"{path}.{suffix}") from exc
            except (TypeError, ValueError) as exc:
                raise ValidationError(str(exc), field_path=path) from exc
        tool_payload = payload.get("tool")
        return cls(
            joints=tuple(joints),
            base_pose=RigidTransform.from_dict(
                payload.get("base_pose"), field_path=f"{field_path}.base_pose"
            ),
            fingertip_radius=float(payload.get("fingertip_radius", DEFAULT_FINGERTIP_RADIUS)),
            fingertip_offset=RigidTransform.from_dict(
                payload.get("fingertip_offset"), field_path=f"{field_path}.fingertip_offset"
            ),
            link_spheres=tuple(payload.get("link_spheres", ())),
            tool=ToolAttachment.from_dict(tool_payload) if tool_payload is not None else None,
            name=str(payload.get("name", "robot")),
        )


def cartesian_gantry(
    base_translation: Sequence[float] = (0.55, 0.0, 0.45),
    *,
    reach: Sequence[tuple[float, float]] = ((-0.9, 0.3), (-0.5, 0.5), (-0.45, 0.2)),
    wrist_limits: tuple[float, float] = (-np.pi, np.pi),
    fingertip_radius: float = DEFAULT_FINGERTIP_RADIUS,
) -> KinematicChain:
    """Default desk robot: x, y, z prismatic joints and a revolute wrist about z.

    The fingertip sits on the wrist axis, so the wrist only matters once a
    tool is attached.
    """

    axes = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    joints = [
        ChainJoint(name=name, kind=JointKind.PRISMATIC, axis=np.array(axis), limits=tuple(limits))
        for name, axis, limits in zip(("x", "y", "z"), axes, reach)
    ]
    joints.append(
        ChainJoint(
            name="wrist",
            kind=JointKind.REVOLUTE,
            axis=np.array([0.0, 0.0, 1.0]),
            limits=wrist_limits,
        )
    )
    return KinematicChain(
        joints=tuple(joints),
        base_pose=RigidTransform.from_translation(base_translation),
        fingertip_radius=fingertip_radius,
        name="desk-gantry",
    )
