"""Rollout oracle for push affordances.

A floating spherical pusher, sized like the robot fingertip, is dropped at
each observed point on the true surface, approaches along the inward
normal and makes one push. The joint displacement that push causes is the
point's actionability. Only this module sees the ground-truth scene.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..model.articulation import JointKind
from ..model.chain import ChainJoint, KinematicChain
from ..model.scene import Scene
from ..percept.cloud import PointCloud, downsample
from ..shared.error_handling import ValidationError
from ..sim.collision import point_distance
from ..sim.simulator import ACTION_BOUND, ContactFlag, SimState, detect_contact, split_motion, step

logger = logging.getLogger(__name__)

PUSHER_REACH = 100.0
APPROACH_TOLERANCE = 1e-3
_UP = np.array([0.0, 0.0, 1.0])


class Primitive(str, Enum):
    PUSH = "push"
    PUSH_LEFT = "push_left"


@dataclass(frozen=True)
class AffordanceConfig:
    """Scoring and selection parameters.

    Attributes:
        n_dirs: Push directions tried per scored point.
        point_budget: Points scored after farthest-point downsampling.
        n_p: Candidate points handed to selection.
        n_a: Proposals kept per candidate point.
        n_candidates: Direction pairs sampled per point when proposing.
        stroke: Push length of one scoring rollout.
        approach_distance: Pre-contact stand-off along the surface normal.
        cone_deg: Half-angle of the push cone around the inward normal.
        left_range_deg: Tilt range of push-left directions off the normal.
        transit_resolution: Joint-space spacing of transit collision samples.
        workers: Threads used for scoring; 1 scores inline.
    """

    n_dirs: int = 8
    point_budget: int = 256
    n_p: int = 10
    n_a: int = 10
    n_candidates: int = 16
    stroke: float = ACTION_BOUND
    approach_distance: float = 0.04
    cone_deg: float = 45.0
    left_range_deg: tuple[float, float] = (30.0, 75.0)
    transit_resolution: float = 0.02
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("n_dirs", "point_budget", "n_p", "n_a", "n_candidates", "workers"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive", field_path=f"affordance.{name}")
        for name in ("stroke", "approach_distance", "transit_resolution"):
            if getattr(self, name) <= 0.0:
                raise ValidationError(f"{name} must be positive", field_path=f"affordance.{name}")
        if not 0.0 < self.cone_deg < 90.0:
            raise ValidationError("cone_deg must lie in (0, 90)", field_path="affordance.cone_deg")
        lo, hi = self.left_range_deg
        if not 0.0 <= lo <= hi < 90.0:
            raise ValidationError(
                "left_range_deg must satisfy 0 <= lo <= hi < 90",
                field_path="affordance.left_range_deg",
            )
        object.__setattr__(self, "left_range_deg", (float(lo), float(hi)))


@dataclass(frozen=True, eq=False)
class ScoredPoint:
    """An observed point snapped to the true surface, with its actionability."""

    point: np.ndarray
    normal: np.ndarray
    actionability: float
    seed: int
    index: int


@dataclass(frozen=True, eq=False)
class ActionProposal:
    """A push at ``point``: approach along ``approach``, then move along ``push``."""

    point: np.ndarray
    approach: np.ndarray
    push: np.ndarray
    actionability: float
    success: float

    def __post_init__(self) -> None:
        for name in ("approach", "push"):
            vector = np.asarray(getattr(self, name), dtype=float)
            if abs(float(np.linalg.norm(vector)) - 1.0) > 1e-9:
                raise ValidationError(f"{name} must be unit length", field_path=f"proposal.{name}")
        for name in ("actionability", "success"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ValidationError(
                    f"{name} must be finite and >= 0", field_path=f"proposal.{name}"
                )

    @property
    def normal(self) -> np.ndarray:
        return -np.asarray(self.approach, dtype=float)

    def to_dict(self) -> dict:
        return {
            "point": np.asarray(self.point).tolist(),
            "approach": np.asarray(self.approach).tolist(),
            "push": np.asarray(self.push).tolist(),
            "actionability": self.actionability,
            "success": self.success,
        }


# ============================================================================
# Pusher
# ============================================================================

def pusher_chain(radius: float) -> KinematicChain:
    """Free-floating fingertip: three world-aligned prismatic joints."""

    axes = np.eye(3)
    joints = tuple(
        ChainJoint(
            name=f"pusher_{name}",
            kind=JointKind.PRISMATIC,
            axis=axis,
            limits=(-PUSHER_REACH, PUSHER_REACH),
        )
        for name, axis in zip("xyz", axes)
    )
    return KinematicChain(joints=joints, fingertip_radius=radius, name="pusher")


def pusher_scene(world: Scene) -> Scene:
    return Scene(
        object=world.object,
        robot=pusher_chain(world.robot.fingertip_radius),
        table_height=world.table_height,
        scene_id=f"{world.scene_id}-pusher",
        category=world.category,
    )


def snap_to_surface(world: Scene, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closest true-surface points and their outward normals."""

    obj = world.object
    movable = point_distance(obj.movable, obj.movable_pose(obj.state), points)
    base = point_distance(obj.base, obj.pose, points)
    closer = np.abs(movable.distance) <= np.abs(base.distance)
    witness = np.where(closer[:, None], movable.witness, base.witness)
    normal = np.where(closer[:, None], movable.normal, base.normal)
    normal = normal / np.linalg.norm(normal, axis=1, keepdims=True)
    return witness, normal


def push_once(
    pusher: Scene,
    point: np.ndarray,
    normal: np.ndarray,
    direction: np.ndarray,
    config: AffordanceConfig,
) -> float:
    """``|ds|`` of one approach-and-push with the pusher; 0 when blocked."""

    radius = pusher.robot.fingertip_radius
    contact = point + normal * radius
    pre = contact + normal * config.approach_distance
    state = SimState(q=pre, s=pusher.object.state)
    if detect_contact(pusher, state).flag is not ContactFlag.NONE:
        return 0.0
    for delta in split_motion(contact - pre):
        state = step(pusher, state, delta)
    if state.contact is ContactFlag.UNEXPECTED_COLLISION:
        return 0.0
    if float(np.linalg.norm(state.q - contact)) > APPROACH_TOLERANCE:
        return 0.0
    start = state.s
    for delta in split_motion(direction * config.stroke):
        state = step(pusher, state, delta)
        if state.contact is ContactFlag.UNEXPECTED_COLLISION:
            return 0.0
    return abs(state.s - start)


# ============================================================================
# Direction sampling
# ============================================================================

def _tangent_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    first = np.cross(normal, helper)
    first /= np.linalg.norm(first)
    return first, np.cross(normal, first)


def sample_directions(
    normal: np.ndarray, primitive: Primitive, count: int, seed: int, config: AffordanceConfig
) -> np.ndarray:
    """Unit push directions ``(count, 3)``; a longer draw extends a shorter one."""

    rng = np.random.default_rng(seed)
    draws = rng.random((count, 2))
    inward = -np.asarray(normal, dtype=float)
    if Primitive(primitive) is Primitive.PUSH:
        cos_cone = math.cos(math.radians(config.cone_deg))
        cos_tilt = 1.0 - draws[:, 0] * (1.0 - cos_cone)
        sin_tilt = np.sqrt(np.clip(1.0 - cos_tilt**2, 0.0, None))
        heading = 2.0 * math.pi * draws[:, 1]
        first, second = _tangent_basis(inward)
        directions = (
            cos_tilt[:, None] * inward
            + (sin_tilt * np.cos(heading))[:, None] * first
            + (sin_tilt * np.sin(heading))[:, None] * second
        )
    else:
        # Left of an observer facing the surface along the inward normal.
        left = np.cross(_UP, inward)
        if np.linalg.norm(left) < 1e-6:
            left = _tangent_basis(inward)[0]
        left = left / np.linalg.norm(left)
        lo, hi = config.left_range_deg
        tilt = np.radians(lo + (hi - lo) * draws[:, 0])
        directions = np.cos(tilt)[:, None] * inward + np.sin(tilt)[:, None] * left
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


# ============================================================================
# Operations
# ============================================================================

def score_points(
    cloud: PointCloud,
    world: Scene,
    primitive: Primitive,
    n_dirs: int | None = None,
    seed: int = 0,
    *,
    config: AffordanceConfig | None = None,
) -> list[ScoredPoint]:
    """Actionability of every scored point, in point order.

    The cloud is reduced to ``config.point_budget`` points by farthest-point
    sampling first; each point's score is the best ``|ds|`` over its push
    directions.
    """

    config = config or AffordanceConfig()
    n_dirs = config.n_dirs if n_dirs is None else n_dirs
    if n_dirs < 1:
        raise ValidationError("n_dirs must be positive", field_path="affordance.n_dirs")
    primitive = Primitive(primitive)
    if len(cloud) > config.point_budget:
        cloud = downsample(cloud, config.point_budget, seed)
    points, normals = snap_to_surface(world, cloud.points)
    pusher = pusher_scene(world)

    def score(index: int) -> ScoredPoint:
        point_rng_seed = point_seed(seed, index)
        directions = sample_directions(normals[index], primitive, n_dirs, point_rng_seed, config)
        best = max(
            push_once(pusher, points[index], normals[index], direction, config)
            for direction in directions
        )
        return ScoredPoint(points[index], normals[index], float(best), point_rng_seed, index)

    indices = range(len(points))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            scored = list(pool.map(score, indices))
    else:
        scored = [score(index) for index in indices]
    logger.debug(
        "Scored %d points for %s; %d actionable",
        len(scored),
        primitive.value,
        sum(1 for item in scored if item.actionability > 0.0),
    )
    return scored


def top_points(scored: Sequence[ScoredPoint], n_p: int) -> list[ScoredPoint]:
    """The ``n_p`` actionable points with the highest scores, ties by point order."""

    actionable = [item for item in scored if item.actionability > 0.0]
    return sorted(actionable, key=lambda item: (-item.actionability, item.index))[:n_p]


def propose_actions(
    point: ScoredPoint,
    primitive: Primitive,
    n_a: int,
    seed: int | None = None,
    *,
    world: Scene,
    config: AffordanceConfig | None = None,
    n_candidates: int | None = None,
) -> list[ActionProposal]:
    """Top ``n_a`` pushes at ``point``, sorted by non-increasing success score.

    The candidate directions reuse the point's scoring stream by default, so
    the first ``n_dirs`` candidates are exactly the directions it was scored
    with.
    """

    config = config or AffordanceConfig()
    count = config.n_candidates if n_candidates is None else n_candidates
    if n_a < 1 or count < 1:
        raise ValidationError("n_a and n_candidates must be positive", field_path="affordance.n_a")
    directions = sample_directions(
        point.normal, Primitive(primitive), count, point.seed if seed is None else seed, config
    )
    pusher = pusher_scene(world)
    scores = [
        push_once(pusher, point.point, point.normal, direction, config) for direction in directions
    ]
    order = sorted(range(count), key=lambda index: (-scores[index], index))[:n_a]
    return [
        ActionProposal(
            point=point.point,
            approach=-point.normal,
            push=directions[index],
            actionability=point.actionability,
            success=float(scores[index]),
        )
        for index in order
    ]
