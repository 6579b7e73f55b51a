"""Pinhole depth camera placed on a sphere around the object."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from ..model.scene import Scene
from ..shared.error_handling import ValidationError


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int = 160
    height: int = 120
    vertical_fov: float = 45.0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError("image size must be positive", field_path="camera.intrinsics")
        if not 0.0 < self.vertical_fov < 180.0:
            raise ValidationError(
                "vertical_fov must lie in (0, 180)", field_path="camera.vertical_fov"
            )

    @property
    def focal(self) -> float:
        """Focal length in pixels."""

        return 0.5 * self.height / math.tan(math.radians(self.vertical_fov) / 2.0)


@dataclass(frozen=True, eq=False)
class CameraPose:
    """Camera on a sphere of ``radius`` around ``look_at``, aimed at it.

    ``azimuth`` is measured from ``reference_yaw`` (the heading of the
    object's front, degrees) so that azimuth 0 faces the front.
    """

    azimuth: float
    altitude: float
    radius: float
    look_at: np.ndarray = field(default_factory=lambda: np.zeros(3))
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    reference_yaw: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.altitude < 90.0:
            raise ValidationError(
                "altitude must lie in (0, 90) degrees", field_path="camera.altitude"
            )
        if self.radius <= 0.0:
            raise ValidationError("radius must be positive", field_path="camera.radius")
        look_at = np.array(self.look_at, dtype=float)
        if look_at.shape != (3,):
            raise ValidationError("look_at must be a 3-point", field_path="camera.look_at")
        look_at.setflags(write=False)
        object.__setattr__(self, "look_at", look_at)
        object.__setattr__(self, "azimuth", float(self.azimuth))
        object.__setattr__(self, "altitude", float(self.altitude))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def position(self) -> np.ndarray:
        heading = math.radians(self.azimuth + self.reference_yaw)
        altitude = math.radians(self.altitude)
        offset = np.array(
            [
                math.cos(altitude) * math.cos(heading),
                math.cos(altitude) * math.sin(heading),
                math.sin(altitude),
            ]
        )
        return self.look_at + self.radius * offset

    @property
    def rotation(self) -> np.ndarray:
        """Camera-to-world rotation; camera axes are x right, y down, z forward."""

        forward = self.look_at - self.position
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.array([0.0, 0.0, 1.0]))
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return np.column_stack([right, -up, forward])

    @property
    def forward(self) -> np.ndarray:
        return self.rotation[:, 2]

    def ray_directions(self) -> np.ndarray:
        """Unit world-frame ray directions ``(height * width, 3)``, row-major."""

        width, height = self.intrinsics.width, self.intrinsics.height
        focal = self.intrinsics.focal
        u, v = np.meshgrid(np.arange(width) + 0.5, np.arange(height) + 0.5)
        camera = np.stack(
            [(u - width / 2.0) / focal, (v - height / 2.0) / focal, np.ones_like(u)], axis=-1
        ).reshape(-1, 3)
        camera /= np.linalg.norm(camera, axis=1, keepdims=True)
        return camera @ self.rotation.T

    def to_dict(self) -> Dict[str, Any]:
        return {
            "azimuth": self.azimuth,
            "altitude": self.altitude,
            "radius": self.radius,
            "look_at": self.look_at.tolist(),
            "reference_yaw": self.reference_yaw,
            "width": self.intrinsics.width,
            "height": self.intrinsics.height,
            "vertical_fov": self.intrinsics.vertical_fov,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "CameraPose":
        try:
            return cls(
                azimuth=float(payload["azimuth"]),
                altitude=float(payload["altitude"]),
                radius=float(payload["radius"]),
                look_at=np.asarray(payload.get("look_at", (0.0, 0.0, 0.0)), dtype=float),
                intrinsics=CameraIntrinsics(
                    int(payload.get("width", 160)),
                    int(payload.get("height", 120)),
                    float(payload.get("vertical_fov", 45.0)),
                ),
                reference_yaw=float(payload.get("reference_yaw", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed camera record: {exc}", field_path="camera") from exc


def _uniform(rng: np.random.Generator, bounds: Sequence[float], name: str) -> float:
    lo, hi = float(bounds[0]), float(bounds[1])
    if lo > hi:
        raise ValidationError(f"empty {name} range [{lo}, {hi}]", field_path=f"camera.{name}_range")
    if lo == hi:
        return lo
    return float(rng.uniform(lo, hi))


def sample_camera(
    azimuth_range: Sequence[float],
    altitude_range: Sequence[float],
    radius: float,
    look_at: Sequence[float],
    seed: int,
    *,
    intrinsics: CameraIntrinsics | None = None,
    reference_yaw: float = 0.0,
) -> CameraPose:
    """Draw azimuth and altitude uniformly from half-open degree ranges."""

    rng = np.random.default_rng(seed)
    azimuth = _uniform(rng, azimuth_range, "azimuth")
    altitude = _uniform(rng, altitude_range, "altitude")
    return CameraPose(
        azimuth=azimuth,
        altitude=altitude,
        radius=radius,
        look_at=np.asarray(look_at, dtype=float),
        intrinsics=intrinsics or CameraIntrinsics(),
        reference_yaw=reference_yaw,
    )


def object_heading(scene: Scene) -> float:
    """Yaw of the object's front (+x of the object frame), in degrees."""

    front = scene.object.pose.apply_vector(np.array([1.0, 0.0, 0.0]))
    return math.degrees(math.atan2(front[1], front[0]))


def scene_camera(scene: Scene, seed: int, *, s: float | None = None) -> CameraPose:
    """Sample a camera with the scene's sensing ranges, aimed at the object."""

    sensing = scene.sensing
    lower, upper = scene.object.world_bounds(s)
    width, height = sensing.image_size
    return sample_camera(
        sensing.azimuth_range,
        sensing.altitude_range,
        sensing.radius,
        (lower + upper) / 2.0,
        seed,
        intrinsics=CameraIntrinsics(width, height, sensing.vertical_fov),
        reference_yaw=object_heading(scene),
    )
