"""Rigid transforms and geometry primitives for links, tools and robots.

Every primitive lives in its own frame given by ``pose`` relative to the
parent link frame. Boxes and hulls expose their supporting planes in that
frame (``n . x + d <= 0`` inside), which both the renderer and the collision
queries consume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Mapping, Sequence

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.transform import Rotation

from ..shared.error_handling import ValidationError

ORTHONORMAL_TOLERANCE = 1e-6


def _frozen_array(values: Any, shape: tuple[int, ...] | None = None, *, name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if shape is not None and array.shape != shape:
        raise ValidationError(f"expected shape {shape}, got {array.shape}", field_path=name)
    if not np.all(np.isfinite(array)):
        raise ValidationError("values must be finite", field_path=name)
    array.setflags(write=False)
    return array


def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix of ``angle`` radians about the unit ``axis`` (Rodrigues)."""

    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


# ============================================================================
# Rigid transforms
# ============================================================================

@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Rotation followed by translation: ``x -> R x + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        rotation = _frozen_array(self.rotation, (3, 3), name="rotation")
        translation = _frozen_array(self.translation, (3,), name="translation")
        if not np.allclose(rotation @ rotation.T, np.eye(3), atol=ORTHONORMAL_TOLERANCE):
            raise ValidationError("rotation must be orthonormal", field_path="rotation")
        if np.linalg.det(rotation) < 0.0:
            raise ValidationError("rotation must be proper (det = +1)", field_path="rotation")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def _trusted(cls, rotation: np.ndarray, translation: np.ndarray) -> "RigidTransform":
        # Hot path for kinematics: inputs already orthonormal by construction.
        instance = object.__new__(cls)
        object.__setattr__(instance, "rotation", rotation)
        object.__setattr__(instance, "translation", translation)
        return instance

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls._trusted(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, translation: Sequence[float]) -> "RigidTransform":
        return cls(np.eye(3), np.asarray(translation, dtype=float))

    @classmethod
    def from_axis_angle(
        cls,
        axis: Sequence[float],
        angle: float,
        pivot: Sequence[float] | None = None,
    ) -> "RigidTransform":
        """Rotation of ``angle`` about the line through ``pivot`` along ``axis``."""

        unit = np.asarray(axis, dtype=float)
        unit = unit / np.linalg.norm(unit)
        rotation = axis_angle_matrix(unit, angle)
        point = np.zeros(3) if pivot is None else np.asarray(pivot, dtype=float)
        return cls._trusted(rotation, point - rotation @ point)

    @classmethod
    def from_rpy(
        cls,
        rpy: Sequence[float],
        translation: Sequence[float] = (0.0, 0.0, 0.0),
    ) -> "RigidTransform":
        """URDF convention: fixed-axis roll, pitch, yaw about x, y, z."""

        rotation = Rotation.from_euler("xyz", np.asarray(rpy, dtype=float)).as_matrix()
        return cls(rotation, np.asarray(translation, dtype=float))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "RigidTransform":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise ValidationError("homogeneous matrix must be 4x4", field_path="matrix")
        return cls(matrix[:3, :3], matrix[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    @property
    def rpy(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_euler("xyz")

    @property
    def angle(self) -> float:
        cos_angle = (np.trace(self.rotation) - 1.0) / 2.0
        return float(math.acos(min(1.0, max(-1.0, cos_angle))))

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform._trusted(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rotation_t = self.rotation.T
        return RigidTransform._trusted(rotation_t, -rotation_t @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform a point ``(3,)`` or an array of points ``(n, 3)``."""

        points = np.asarray(points, dtype=float)
        return points @ self.rotation.T + self.translation

    def apply_vector(self, vectors: np.ndarray) -> np.ndarray:
        return np.asarray(vectors, dtype=float) @ self.rotation.T

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.rotation, other.rotation, atol=atol)
            and np.allclose(self.translation, other.translation, atol=atol)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"translation": self.translation.tolist(), "rpy": self.rpy.tolist()}

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any] | None, *, field_path: str) -> "RigidTransform":
        if payload is None:
            return cls.identity()
        if not isinstance(payload, Mapping):
            raise ValidationError("pose must be a mapping", field_path=field_path)
        translation = _vector(
            payload.get("translation", (0.0, 0.0, 0.0)), f"{field_path}.translation"
        )
        if "rotation" in payload:
            rotation = np.asarray(payload["rotation"], dtype=float)
            if rotation.shape != (3, 3):
                raise ValidationError("rotation must be 3x3", field_path=f"{field_path}.rotation")
            try:
                return cls(rotation, translation)
            except ValidationError as exc:
                raise ValidationError(exc.message, field_path=f"{field_path}.rotation") from exc
        rpy = _vector(payload.get("rpy", (0.0, 0.0, 0.0)), f"{field_path}.rpy")
        return cls.from_rpy(rpy, translation)


def _vector(value: Any, field_path: str, size: int = 3) -> np.ndarray:
    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("expected a numeric vector", field_path=field_path) from exc
    if array.shape != (size,) or not np.all(np.isfinite(array)):
        raise ValidationError(
            f"expected {size} finite numbers", field_path=field_path, invalid_value=value
        )
    return array


# ============================================================================
# Geometry primitives
# ============================================================================

class GeometryKind(str, Enum):
    MESH = "mesh"
    HULL = "hull"
    BOX = "box"
    SPHERE = "sphere"


_BOX_NORMALS = np.array(
    [[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0], [0, -1.0, 0], [0, 0, 1.0], [0, 0, -1.0]]
)


@dataclass(frozen=True, eq=False)
class RigidGeometry:
    """One rigid primitive: triangle mesh, convex hull, box or sphere.

    Boxes and spheres are parameterised by ``center`` (and ``half_extents`` or
    ``radius``) in the primitive frame; meshes and hulls by ``vertices``.
    Contact queries treat a mesh as its convex hull; rendering uses its
    triangles.
    """

    kind: GeometryKind
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    vertices: np.ndarray | None = None
    faces: np.ndarray | None = None
    center: np.ndarray | None = None
    half_extents: np.ndarray | None = None
    radius: float | None = None
    name: str = ""

    def __post_init__(self) -> None:
        kind = GeometryKind(self.kind)
        object.__setattr__(self, "kind", kind)
        label = self.name or kind.value
        if kind is GeometryKind.BOX:
            center = _frozen_array(
                self.center if self.center is not None else np.zeros(3),
                (3,),
                name=f"{label}.center",
            )
            half = _frozen_array(self.half_extents, (3,), name=f"{label}.half_extents")
            if np.any(half <= 0.0):
                raise ValidationError(
                    "box half-extents must be positive", field_path=f"{label}.half_extents"
                )
            object.__setattr__(self, "center", center)
            object.__setattr__(self, "half_extents", half)
        elif kind is GeometryKind.SPHERE:
            center = _frozen_array(
                self.center if self.center is not None else np.zeros(3),
                (3,),
                name=f"{label}.center",
            )
            if self.radius is None or not math.isfinite(self.radius) or self.radius <= 0.0:
                raise ValidationError(
                    "sphere radius must be positive", field_path=f"{label}.radius"
                )
            object.__setattr__(self, "center", center)
            object.__setattr__(self, "radius", float(self.radius))
        else:
            if self.vertices is None:
                raise ValidationError("vertices are required", field_path=f"{label}.vertices")
            vertices = _frozen_array(self.vertices, name=f"{label}.vertices")
            if vertices.ndim != 2 or vertices.shape[1] != 3:
                raise ValidationError(
                    "vertices must be an (n, 3) array", field_path=f"{label}.vertices"
                )
            object.__setattr__(self, "vertices", vertices)
            if kind is GeometryKind.MESH:
                if self.faces is None:
                    raise ValidationError("mesh faces are required", field_path=f"{label}.faces")
                faces = np.array(self.faces, dtype=np.int64)
                if faces.ndim != 2 or faces.shape[1] != 3:
                    raise ValidationError(
                        "faces must be an (m, 3) array", field_path=f"{label}.faces"
                    )
                if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
                    raise ValidationError("face indices out of range", field_path=f"{label}.faces")
                faces.setflags(write=False)
                object.__setattr__(self, "faces", faces)
            if not is_full_rank(vertices):
                raise ValidationError(
                    "convex hull needs at least 4 non-coplanar vertices",
                    field_path=f"{label}.vertices",
                )

    # -- constructors --------------------------------------------------------

    @classmethod
    def box(
        cls,
        half_extents: Sequence[float],
        center: Sequence[float] = (0.0, 0.0, 0.0),
        *,
        pose: RigidTransform | None = None,
        name: str = "",
    ) -> "RigidGeometry":
        return cls(
            GeometryKind.BOX,
            pose=pose or RigidTransform.identity(),
            center=np.asarray(center, dtype=float),
            half_extents=np.asarray(half_extents, dtype=float),
            name=name,
        )

    @classmethod
    def box_from_bounds(
        cls, lower: Sequence[float], upper: Sequence[float], *, name: str = ""
    ) -> "RigidGeometry":
        lo = np.asarray(lower, dtype=float)
        hi = np.asarray(upper, dtype=float)
        return cls.box((hi - lo) / 2.0, (hi + lo) / 2.0, name=name)

    @classmethod
    def sphere(
        cls,
        radius: float,
        center: Sequence[float] = (0.0, 0.0, 0.0),
        *,
        pose: RigidTransform | None = None,
        name: str = "",
    ) -> "RigidGeometry":
        return cls(
            GeometryKind.SPHERE,
            pose=pose or RigidTransform.identity(),
            center=np.asarray(center, dtype=float),
            radius=float(radius),
            name=name,
        )

    @classmethod
    def hull(
        cls, vertices: np.ndarray, *, pose: RigidTransform | None = None, name: str = ""
    ) -> "RigidGeometry":
        return cls(
            GeometryKind.HULL, pose=pose or RigidTransform.identity(), vertices=vertices, name=name
        )

    @classmethod
    def mesh(
        cls,
        vertices: np.ndarray,
        faces: np.ndarray,
        *,
        pose: RigidTransform | None = None,
        name: str = "",
    ) -> "RigidGeometry":
        return cls(
            GeometryKind.MESH,
            pose=pose or RigidTransform.identity(),
            vertices=vertices,
            faces=faces,
            name=name,
        )

    @classmethod
    def cylinder_hull(
        cls,
        radius: float,
        height: float,
        *,
        segments: int = 16,
        base_z: float = 0.0,
        name: str = "",
    ) -> "RigidGeometry":
        """Regular prism approximating a vertical cylinder."""

        angles = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)
        ring = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)
        bottom = np.column_stack([ring, np.full(segments, base_z)])
        top = np.column_stack([ring, np.full(segments, base_z + height)])
        return cls.hull(np.vstack([bottom, top]), name=name)

    # -- derived data --------------------------------------------------------

    @cached_property
    def _qhull(self) -> ConvexHull:
        return ConvexHull(self.vertices)

    @cached_property
    def support_vertices(self) -> np.ndarray:
        """Vertices spanning the primitive's convex hull, in the primitive frame."""

        if self.kind is GeometryKind.BOX:
            signs = np.array(
                [[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float
            )
            return self.center + signs * self.half_extents
        if self.kind is GeometryKind.SPHERE:
            return self.center + self.radius * np.vstack([np.eye(3), -np.eye(3)])
        return self.vertices[self._qhull.vertices]

    @cached_property
    def planes(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals ``(m, 3)`` and offsets ``(m,)`` in the primitive frame."""

        if self.kind is GeometryKind.SPHERE:
            raise TypeError("spheres have no supporting planes")
        if self.kind is GeometryKind.BOX:
            normals = _BOX_NORMALS
            offsets = -(normals @ self.center) - np.repeat(self.half_extents, 2)
            return normals, offsets
        equations = self._qhull.equations
        return equations[:, :3].copy(), equations[:, 3].copy()

    @cached_property
    def local_center(self) -> np.ndarray:
        if self.kind in (GeometryKind.BOX, GeometryKind.SPHERE):
            return np.asarray(self.center)
        return self.support_vertices.mean(axis=0)

    @cached_property
    def volume(self) -> float:
        if self.kind is GeometryKind.BOX:
            return float(8.0 * np.prod(self.half_extents))
        if self.kind is GeometryKind.SPHERE:
            return float(4.0 / 3.0 * math.pi * self.radius**3)
        return float(self._qhull.volume)

    @cached_property
    def bounding_radius(self) -> float:
        return float(np.max(np.linalg.norm(self.support_vertices - self.local_center, axis=1)))

    def world_points(self, link_pose: RigidTransform) -> np.ndarray:
        """Hull-spanning points of the primitive expressed in the world frame."""

        return (link_pose @ self.pose).apply(self.support_vertices)

    def collision_spheres(self) -> np.ndarray:
        """Sphere proxies ``(k, 4)`` rows of ``(x, y, z, r)`` in the parent frame.

        Boxes become a chain of spheres along their longest axis with radius
        equal to the larger of the two remaining half-extents.
        """

        if self.kind is GeometryKind.SPHERE:
            centers = self.pose.apply(self.center)[None, :]
            return np.column_stack([centers, [self.radius]])
        if self.kind is not GeometryKind.BOX:
            raise TypeError("only boxes and spheres have sphere proxies")
        order = np.argsort(self.half_extents)
        long_axis = order[2]
        radius = float(self.half_extents[order[1]])
        length = float(self.half_extents[long_axis])
        count = max(1, int(math.ceil(length / radius)) + 1)
        offsets = (
            np.linspace(-length + radius, length - radius, count) if length > radius else [0.0]
        )
        local = np.tile(self.center, (len(offsets), 1))
        local[:, long_axis] += offsets
        centers = self.pose.apply(local)
        return np.column_stack([centers, np.full(len(centers), radius)])

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"type": self.kind.value}
        if self.name:
            payload["name"] = self.name
        if self.kind is GeometryKind.BOX:
            payload["center"] = self.center.tolist()
            payload["half_extents"] = self.half_extents.tolist()
        elif self.kind is GeometryKind.SPHERE:
            payload["center"] = self.center.tolist()
            payload["radius"] = self.radius
        else:
            payload["vertices"] = self.vertices.tolist()
            if self.kind is GeometryKind.MESH:
                payload["faces"] = self.faces.tolist()
        payload["pose"] = self.pose.to_dict()
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any], *, field_path: str) -> "RigidGeometry":
        if not isinstance(payload, Mapping):
            raise ValidationError("geometry must be a mapping", field_path=field_path)
        raw_kind = payload.get("type")
        try:
            kind = GeometryKind(raw_kind)
        except ValueError as exc:
            raise ValidationError(
                "type must be one of mesh, hull, box, sphere",
                field_path=f"{field_path}.type",
                invalid_value=raw_kind,
            ) from exc
        pose = RigidTransform.from_dict(payload.get("pose"), field_path=f"{field_path}.pose")
        name = str(payload.get("name", ""))
        try:
            if kind is GeometryKind.BOX:
                return cls.box(
                    _vector(payload.get("half_extents"), f"{field_path}.half_extents"),
                    _vector(payload.get("center", (0.0, 0.0, 0.0)), f"{field_path}.center"),
                    pose=pose,
                    name=name,
                )
            if kind is GeometryKind.SPHERE:
                radius = payload.get("radius")
                if not isinstance(radius, (int, float)):
                    raise ValidationError(
                        "radius must be a number", field_path=f"{field_path}.radius"
                    )
                return cls.sphere(
                    float(radius),
                    _vector(payload.get("center", (0.0, 0.0, 0.0)), f"{field_path}.center"),
                    pose=pose,
                    name=name,
                )
            vertices = np.asarray(payload.get("vertices"), dtype=float)
            if kind is GeometryKind.HULL:
                return cls.hull(vertices, pose=pose, name=name)
            return cls.mesh(
                vertices, np.asarray(payload.get("faces"), dtype=np.int64), pose=pose, name=name
            )
        except ValidationError as exc:
            if exc.field_path and exc.field_path.startswith(field_path):
                raise
            suffix = (exc.field_path or "").split(".")[-1]
            raise ValidationError(exc.message, field_path=f"{field_path}.{suffix}") from exc
        except (TypeError, ValueError) as exc:
            raise ValidationError(str(exc), field_path=field_path) from exc


def is_full_rank(points: np.ndarray, tolerance: float = 1e-9) -> bool:
    """True when ``points`` has at least 4 members spanning three dimensions."""

    points = np.asarray(points, dtype=float)
    if len(points) < 4:
        return False
    centered = points - points.mean(axis=0)
    singular = np.linalg.svd(centered, compute_uv=False)
    scale = max(float(singular[0]), 1e-300)
    return bool(singular[2] > tolerance * scale)
