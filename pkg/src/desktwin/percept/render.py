"""Ray-cast depth rendering of a scene into a single-view point cloud.

Only the articulated object and the table are rendered; the robot is
never in view. Rays are cast through pixel centers, row-major. Convex
primitives are intersected against their facet planes, spheres in closed
form and triangle meshes with the Moller-Trumbore test.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..model.geometry import GeometryKind, RigidGeometry, RigidTransform
from ..model.scene import Scene
from ..shared.error_handling import PerceptionError, ValidationError
from .camera import CameraPose
from .cloud import NoiseConfig, PointCloud, Provenance

logger = logging.getLogger(__name__)

MESH_RAY_CHUNK = 2048
TABLE_CLEARANCE = 0.001


class HitId(IntEnum):
    NONE = -1
    TABLE = 0
    BASE = 1
    MOVABLE = 2


@dataclass(frozen=True, eq=False)
class RenderedFrame:
    """Everything one render produces.

    Attributes:
        cloud: Surviving noisy hits as a world-frame cloud.
        hit_ids: Per-pixel ``HitId`` values ``(height, width)`` before dropout.
        point_pixels: Flat pixel index of every cloud point.
        point_ids: ``HitId`` of every cloud point.
    """

    cloud: PointCloud | None
    hit_ids: np.ndarray
    point_pixels: np.ndarray
    point_ids: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "width": int(self.hit_ids.shape[1]),
                "height": int(self.hit_ids.shape[0]),
                "labels": {member.name.lower(): int(member) for member in HitId},
                "hit_ids": self.hit_ids.tolist(),
            }
        )


def dump_hit_ids(frame: RenderedFrame, path: Path) -> None:
    """Write the per-pixel hit-id map as JSON."""

    Path(path).write_text(frame.to_json() + "\n", encoding="utf-8")


# ============================================================================
# Ray intersection
# ============================================================================

def _convex_hits(
    origin: np.ndarray, directions: np.ndarray, normals: np.ndarray, offsets: np.ndarray
) -> tuple[np.ndarray, bool]:
    """Entry distances against ``n . x + d <= 0`` (``inf`` on miss)."""

    start = normals @ origin + offsets
    if np.all(start <= 0.0):
        return np.full(len(directions), np.inf), True
    rates = directions @ normals.T
    with np.errstate(divide="ignore", invalid="ignore"):
        crossing = -start[None, :] / rates
    entering = rates < 0.0
    exiting = rates > 0.0
    t_enter = np.max(np.where(entering, crossing, -np.inf), axis=1)
    t_exit = np.min(np.where(exiting, crossing, np.inf), axis=1)
    # Rays parallel to a plane they start outside of never enter.
    parallel_miss = np.any((rates == 0.0) & (start[None, :] > 0.0), axis=1)
    hit = (t_enter <= t_exit) & (t_enter > 0.0) & ~parallel_miss
    return np.where(hit, t_enter, np.inf), False


def _sphere_hits(
    origin: np.ndarray, directions: np.ndarray, center: np.ndarray, radius: float
) -> tuple[np.ndarray, bool]:
    offset = origin - center
    c = float(offset @ offset) - radius * radius
    if c <= 0.0:
        return np.full(len(directions), np.inf), True
    b = directions @ offset
    discriminant = b * b - c
    with np.errstate(invalid="ignore"):
        t = -b - np.sqrt(discriminant)
    return np.where((discriminant >= 0.0) & (t > 0.0), t, np.inf), False


def _mesh_hits(
    origin: np.ndarray, directions: np.ndarray, vertices: np.ndarray, faces: np.ndarray
) -> np.ndarray:
    a = vertices[faces[:, 0]]
    edge1 = vertices[faces[:, 1]] - a
    edge2 = vertices[faces[:, 2]] - a
    offset = origin - a
    q = np.cross(offset, edge1)
    result = np.full(len(directions), np.inf)
    for start in range(0, len(directions), MESH_RAY_CHUNK):
        chunk = directions[start : start + MESH_RAY_CHUNK]
        p = np.cross(chunk[:, None, :], edge2[None, :, :])
        det = np.einsum("rfi,fi->rf", p, edge1)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            u = np.einsum("rfi,fi->rf", p, offset) * inv
            v = np.einsum("ri,fi->rf", chunk, q) * inv
            t = np.einsum("fi,fi->f", q, edge2)[None, :] * inv
        valid = (np.abs(det) > 1e-12) & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > 0.0)
        result[start : start + MESH_RAY_CHUNK] = np.min(np.where(valid, t, np.inf), axis=1)
    return result


def primitive_hits(
    part: RigidGeometry, link_pose: RigidTransform, origin: np.ndarray, directions: np.ndarray
) -> np.ndarray:
    """Ray parameters of the first hit on one primitive (``inf`` on miss)."""

    frame = link_pose @ part.pose
    inverse = frame.inverse()
    local_origin = inverse.apply(origin)
    local_directions = inverse.apply_vector(directions)
    if part.kind is GeometryKind.SPHERE:
        t, inside = _sphere_hits(local_origin, local_directions, part.center, float(part.radius))
    elif part.kind is GeometryKind.MESH:
        return _mesh_hits(local_origin, local_directions, part.vertices, part.faces)
    else:
        normals, offsets = part.planes
        t, inside = _convex_hits(local_origin, local_directions, normals, offsets)
    if inside:
        raise PerceptionError(
            "camera inside geometry",
            context={"part": part.name or part.kind.value, "camera": origin.tolist()},
        )
    return t


def _link_hits(
    parts: Iterable[RigidGeometry],
    link_pose: RigidTransform,
    origin: np.ndarray,
    directions: np.ndarray,
) -> np.ndarray:
    best = np.full(len(directions), np.inf)
    for part in parts:
        np.minimum(best, primitive_hits(part, link_pose, origin, directions), out=best)
    return best


def _table_hits(origin: np.ndarray, directions: np.ndarray, height: float) -> np.ndarray:
    if origin[2] <= height:
        raise PerceptionError("camera below the table plane", context={"camera": origin.tolist()})
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (height - origin[2]) / directions[:, 2]
    return np.where(directions[:, 2] < 0.0, t, np.inf)


# ============================================================================
# Rendering
# ============================================================================

def render_frame(
    scene: Scene,
    s: float,
    cam: CameraPose,
    noise: NoiseConfig,
    *,
    include_table: bool = True,
) -> RenderedFrame:
    """Render the object at joint value ``s`` plus the table.

    Depth noise is drawn for every pixel in row-major order before the
    dropout draw, so results depend only on the arguments.
    """

    obj = scene.object
    if not obj.joint.contains(s):
        raise ValidationError(f"joint value {s} outside limits", field_path="joint.state")
    origin = cam.position
    directions = cam.ray_directions()

    # Row order matches HitId: table, base, movable.
    table = (
        _table_hits(origin, directions, scene.table_height)
        if include_table
        else np.full(len(directions), np.inf)
    )
    stacked = np.vstack(
        [
            table,
            _link_hits(obj.base, obj.pose, origin, directions),
            _link_hits(obj.movable, obj.pose @ obj.joint.motion(s), origin, directions),
        ]
    )
    nearest = np.argmin(stacked, axis=0)
    depth = stacked[nearest, np.arange(len(directions))]
    hit = np.isfinite(depth)
    ids = np.where(hit, nearest, int(HitId.NONE)).astype(np.int64)

    rng = np.random.default_rng(noise.seed)
    jitter = rng.normal(0.0, 1.0, len(directions)) * noise.depth_sigma
    kept = rng.random(len(directions)) >= noise.dropout
    survivors = np.flatnonzero(hit & kept)

    height, width = cam.intrinsics.height, cam.intrinsics.width
    hit_ids = ids.reshape(height, width)
    if len(survivors) == 0:
        return RenderedFrame(None, hit_ids, survivors, ids[survivors])
    ranges = depth[survivors] + jitter[survivors]
    points = origin + ranges[:, None] * directions[survivors]
    cloud = PointCloud(
        points,
        frame="world",
        provenance=Provenance(
            camera=cam, noise=noise, scene_id=scene.scene_id, joint_state=float(s)
        ),
    )
    return RenderedFrame(cloud, hit_ids, survivors, ids[survivors])


def render_point_cloud(scene: Scene, s: float, cam: CameraPose, noise: NoiseConfig) -> PointCloud:
    """Single-view world-frame point cloud of the scene at joint value ``s``."""

    frame = render_frame(scene, s, cam, noise)
    if frame.cloud is None:
        raise PerceptionError("camera sees no geometry", context={"camera": cam.to_dict()})
    logger.debug("Rendered %d points of %s at s=%.4f", len(frame.cloud), scene.scene_id, s)
    return frame.cloud


def scene_crop_box(
    scene: Scene, states: Sequence[float], margin: float
) -> tuple[np.ndarray, np.ndarray]:
    """Object bounds over ``states`` grown by ``margin``, floor just above the table."""

    lowers, uppers = zip(*(scene.object.world_bounds(s) for s in states))
    lower = np.min(lowers, axis=0) - margin
    upper = np.max(uppers, axis=0) + margin
    lower[2] = scene.table_height + TABLE_CLEARANCE
    return lower, upper
