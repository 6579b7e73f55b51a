"""Scene files: an articulated object, a robot chain and the sensing setup.

Scene documents are JSON (or YAML) mappings with ``"schema_version": 1``::

    {
      "schema_version": 1,
      "id": "drawer-000",
      "category": "drawer",
      "table_height": 0.0,
      "object": {"pose": {...}, "joint": {...}, "base": [...], "movable": [...]},
      "robot": {"base_pose": {...}, "joints": [...], "fingertip_radius": 0.01},
      "q0": [0, 0, 0, 0],
      "sensing": {"azimuth_range": [-60, 60], "altitude_range": [15, 45], ...}
    }

Units are meters and radians throughout (angles in ``sensing`` are degrees).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping

import numpy as np

from ..shared.config import read_document
from ..shared.error_handling import SceneFormatError, ValidationError
from .articulation import ArticulatedObject
from .chain import KinematicChain
from .geometry import RigidTransform

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SceneSensing:
    """Camera sampling ranges and sensor noise defaults carried by a scene."""

    azimuth_range: tuple[float, float] = (-60.0, 60.0)
    altitude_range: tuple[float, float] = (15.0, 45.0)
    radius: float = 1.2
    image_size: tuple[int, int] = (160, 120)
    vertical_fov: float = 45.0
    depth_sigma: float = 0.002
    dropout: float = 0.02
    crop_margin: float = 0.05

    def __post_init__(self) -> None:
        for name in ("azimuth_range", "altitude_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValidationError(f"{name} must satisfy lo <= hi", field_path=f"sensing.{name}")
            object.__setattr__(self, name, (float(lo), float(hi)))
        lo, hi = self.altitude_range
        if lo <= 0.0 or hi >= 90.0:
            raise ValidationError(
                "altitude must lie in (0, 90) degrees", field_path="sensing.altitude_range"
            )
        if self.radius <= 0.0:
            raise ValidationError("radius must be positive", field_path="sensing.radius")
        width, height = self.image_size
        if width < 1 or height < 1:
            raise ValidationError("image size must be positive", field_path="sensing.image_size")
        object.__setattr__(self, "image_size", (int(width), int(height)))
        if not 0.0 < self.vertical_fov < 180.0:
            raise ValidationError(
                "vertical_fov must lie in (0, 180)", field_path="sensing.vertical_fov"
            )
        if self.depth_sigma < 0.0:
            raise ValidationError("depth_sigma must be >= 0", field_path="sensing.depth_sigma")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must lie in [0, 1)", field_path="sensing.dropout")
        if self.crop_margin < 0.0:
            raise ValidationError("crop_margin must be >= 0", field_path="sensing.crop_margin")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "azimuth_range": list(self.azimuth_range),
            "altitude_range": list(self.altitude_range),
            "radius": self.radius,
            "image_size": list(self.image_size),
            "vertical_fov": self.vertical_fov,
            "depth_sigma": self.depth_sigma,
            "dropout": self.dropout,
            "crop_margin": self.crop_margin,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any] | None) -> "SceneSensing":
        if payload is None:
            return cls()
        if not isinstance(payload, Mapping):
            raise ValidationError("sensing must be a mapping", field_path="sensing")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ValidationError(f"unknown keys {unknown}", field_path=f"sensing.{unknown[0]}")
        values = {
            key: tuple(value) if isinstance(value, list) else value
            for key, value in payload.items()
        }
        try:
            return cls(**values)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(str(exc), field_path="sensing") from exc


@dataclass(frozen=True, eq=False)
class Scene:
    """Everything the simulator and renderer need for one desk setup.

    The robot base pose lives on the chain (``robot.base_pose``); ``q0`` is the
    robot's initial configuration.
    """

    object: ArticulatedObject
    robot: KinematicChain
    q0: np.ndarray | None = None
    table_height: float = 0.0
    scene_id: str = "scene"
    category: str = ""
    sensing: SceneSensing = field(default_factory=SceneSensing)

    def __post_init__(self) -> None:
        q0 = np.zeros(self.robot.dof) if self.q0 is None else np.array(self.q0, dtype=float)
        if q0.shape != (self.robot.dof,):
            raise ValidationError(
                f"q0 must have {self.robot.dof} entries", field_path="q0", invalid_value=q0.tolist()
            )
        if not self.robot.within_limits(q0):
            raise ValidationError(
                "q0 outside robot joint limits", field_path="q0", invalid_value=q0.tolist()
            )
        q0.setflags(write=False)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "table_height", float(self.table_height))

    @property
    def robot_base_pose(self) -> RigidTransform:
        return self.robot.base_pose

    def with_object(self, obj: ArticulatedObject) -> "Scene":
        return replace(self, object=obj)

    def with_robot(self, robot: KinematicChain) -> "Scene":
        return replace(self, robot=robot)

    def with_state(self, s: float) -> "Scene":
        return replace(self, object=self.object.with_state(s))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.scene_id,
            "category": self.category,
            "table_height": self.table_height,
            "object": self.object.to_dict(),
            "robot": self.robot.to_dict(),
            "q0": self.q0.tolist(),
            "sensing": self.sensing.to_dict(),
        }


def scene_from_dict(document: Mapping[str, Any], *, check_contact: bool = True) -> Scene:
    """Validate ``document`` against schema version 1 and build a Scene."""

    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SceneFormatError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})",
            field_path="schema_version",
        )
    for key in ("object", "robot"):
        if key not in document:
            raise SceneFormatError("required section missing", field_path=key)
    table_height = document.get("table_height", 0.0)
    if not isinstance(table_height, (int, float)):
        raise SceneFormatError("table_height must be a number", field_path="table_height")
    obj = ArticulatedObject.from_dict(document["object"], field_path="object")
    robot = KinematicChain.from_dict(document["robot"], field_path="robot")
    q0 = document.get("q0")
    scene = Scene(
        object=obj,
        robot=robot,
        q0=None if q0 is None else np.asarray(q0, dtype=float),
        table_height=float(table_height),
        scene_id=str(document.get("id", "scene")),
        category=str(document.get("category", obj.category)),
        sensing=SceneSensing.from_dict(document.get("sensing")),
    )
    if check_contact:
        _check_initial_separation(scene)
    return scene


def load_scene(path: Path) -> Scene:
    """Load and validate a scene file (JSON or YAML)."""

    document = read_document(Path(path), error_cls=SceneFormatError)
    scene = scene_from_dict(document)
    logger.info("Loaded scene %s (%s joint)", scene.scene_id, scene.object.joint.kind.value)
    return scene


def save_scene(scene: Scene, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scene.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _check_initial_separation(scene: Scene) -> None:
    from ..sim.simulator import ContactFlag, detect_contact, initial_state

    report = detect_contact(scene, initial_state(scene))
    if report.flag is not ContactFlag.NONE and report.penetration > 1e-4:
        raise ValidationError(
            f"robot interpenetrates the scene at q0 (depth {report.penetration:.4g} m)",
            field_path="q0",
        )
