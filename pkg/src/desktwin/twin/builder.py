"""Assemble a simulatable digital twin from two observations of one push."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from ..model.articulation import ArticulatedObject, JointKind, JointSpec
from ..model.chain import KinematicChain
from ..model.geometry import RigidGeometry, RigidTransform, is_full_rank
from ..model.scene import Scene
from ..percept.cloud import PointCloud, normalize_center
from ..shared.config import read_document
from ..shared.error_handling import (
    HullError,
    InsufficientMotionError,
    ReconstructionError,
    SceneFormatError,
    ValidationError,
)
from ..sim.simulator import SimState, split_motion, step
from .registration import ICP_MAX_ITERATIONS, ICP_TOLERANCE, TRIM_FRACTION, register_segments
from .screw import THETA_MIN, JointEstimate, ScrewMotion, classify_joint, screw_decompose
from .segmentation import (
    CLEANUP_NEIGHBOURS,
    MIN_MOVED_POINTS,
    SegmentationMask,
    default_tau,
    segment_moving,
)

logger = logging.getLogger(__name__)

HULL_SLAB = 0.001
PRISMATIC_RANGE = 0.5
REVOLUTE_RANGE = math.pi


class SignConvention(str, Enum):
    """What positive joint motion means for a reconstructed joint."""

    AWAY_FROM_BASE = "away_from_base"
    CCW_ABOUT_UP = "ccw_about_up"


@dataclass(frozen=True)
class TwinConfig:
    """Reconstruction parameters.

    ``tau`` of ``None`` means ``max(5 mm, 2 * depth_sigma)``.
    """

    tau: float | None = None
    depth_sigma: float = 0.002
    theta_min_deg: float = math.degrees(THETA_MIN)
    cleanup_k: int = CLEANUP_NEIGHBOURS
    min_moved: int = MIN_MOVED_POINTS
    trim: float = TRIM_FRACTION
    icp_iterations: int = ICP_MAX_ITERATIONS
    icp_tolerance: float = ICP_TOLERANCE
    prismatic_range: float = PRISMATIC_RANGE
    revolute_range: float = REVOLUTE_RANGE
    slab: float = HULL_SLAB

    def __post_init__(self) -> None:
        if self.tau is not None and self.tau < 0.0:
            raise ValidationError("tau must be >= 0", field_path="twin.tau", invalid_value=self.tau)
        if self.depth_sigma < 0.0:
            raise ValidationError("depth_sigma must be >= 0", field_path="twin.depth_sigma")
        if not 0.0 < self.theta_min_deg < 180.0:
            raise ValidationError(
                "theta_min_deg must lie in (0, 180)", field_path="twin.theta_min_deg"
            )
        if self.cleanup_k < 0:
            raise ValidationError("cleanup_k must be >= 0", field_path="twin.cleanup_k")
        if self.min_moved < 1:
            raise ValidationError("min_moved must be positive", field_path="twin.min_moved")
        if not 0.0 < self.trim <= 1.0:
            raise ValidationError("trim must lie in (0, 1]", field_path="twin.trim")
        if self.icp_iterations < 1:
            raise ValidationError(
                "icp_iterations must be positive", field_path="twin.icp_iterations"
            )
        if self.prismatic_range <= 0.0 or self.revolute_range <= 0.0:
            raise ValidationError(
                "joint ranges must be positive", field_path="twin.prismatic_range"
            )
        if self.slab <= 0.0:
            raise ValidationError("slab must be positive", field_path="twin.slab")

    @property
    def effective_tau(self) -> float:
        return default_tau(self.depth_sigma) if self.tau is None else self.tau

    @property
    def theta_min(self) -> float:
        return math.radians(self.theta_min_deg)

    def joint_range(self, kind: JointKind) -> float:
        return self.prismatic_range if kind is JointKind.PRISMATIC else self.revolute_range


@dataclass(frozen=True, eq=False)
class TwinModel:
    """Reconstructed articulated object with its joint zero at the post-push state.

    Attributes:
        object: Base hull of static points, movable hull of moved points.
        observed_displacement: Joint motion seen between the two observations,
            so the pre-push state is ``-observed_displacement``.
        screw: Decomposed relative motion, ``None`` for the static fallback.
        low_confidence: Classification close to a threshold.
        static_fallback: Built without observed motion.
    """

    object: ArticulatedObject
    observed_displacement: float
    screw: ScrewMotion | None = None
    low_confidence: bool = False
    static_fallback: bool = False
    moved_counts: tuple[int, int] = (0, 0)
    residual: float = 0.0

    @property
    def s1(self) -> float:
        return self.object.state

    @property
    def kind(self) -> JointKind:
        return self.object.joint.kind

    def to_dict(self) -> Dict[str, Any]:
        estimate: Dict[str, Any] = {
            "observed_displacement": self.observed_displacement,
            "low_confidence": self.low_confidence,
            "static_fallback": self.static_fallback,
            "moved_counts": list(self.moved_counts),
            "residual": self.residual,
        }
        if self.screw is not None:
            estimate["screw"] = {
                "direction": self.screw.direction.tolist(),
                "point": self.screw.point.tolist(),
                "theta": self.screw.theta,
                "translation": self.screw.translation,
            }
        payload = self.object.to_dict()
        payload["estimate"] = estimate
        return payload


def save_twin(twin: TwinModel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(twin.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_twin(path: Path) -> TwinModel:
    """Read a twin file; the ``estimate`` block is optional."""

    document = read_document(path, error_cls=SceneFormatError)
    try:
        obj = ArticulatedObject.from_dict(document, field_path="twin")
    except ValidationError as exc:
        raise SceneFormatError(exc.message, field_path=exc.field_path) from exc
    estimate = document.get("estimate") or {}
    screw = estimate.get("screw")
    return TwinModel(
        object=obj,
        observed_displacement=float(estimate.get("observed_displacement", 0.0)),
        screw=ScrewMotion(
            np.asarray(screw["direction"], dtype=float),
            np.asarray(screw["point"], dtype=float),
            float(screw["theta"]),
            float(screw["translation"]),
        )
        if screw
        else None,
        low_confidence=bool(estimate.get("low_confidence", False)),
        static_fallback=bool(estimate.get("static_fallback", False)),
        moved_counts=tuple(estimate.get("moved_counts", (0, 0))),
        residual=float(estimate.get("residual", 0.0)),
    )


# ============================================================================
# Hulls
# ============================================================================

def link_hull(points: np.ndarray, *, slab: float = HULL_SLAB, name: str = "") -> RigidGeometry:
    """Convex hull of ``points``; flat or collinear sets are thickened by ``slab``."""

    points = np.asarray(points, dtype=float)
    if len(points) < 4:
        raise HullError(f"{name or 'link'} hull needs at least 4 points, got {len(points)}")
    if not is_full_rank(points):
        centered = points - points.mean(axis=0)
        _, singular, vt = np.linalg.svd(centered, full_matrices=True)
        offsets = [vt[2] * slab / 2.0]
        if singular[1] <= 1e-9 * max(float(singular[0]), 1e-300):
            offsets.append(vt[1] * slab / 2.0)
        for offset in offsets:
            points = np.vstack([points + offset, points - offset])
        logger.debug("Thickened degenerate %s hull by a %.4f m slab", name or "link", slab)
    hull = ConvexHull(points)
    return RigidGeometry.hull(points[hull.vertices], name=name)


# ============================================================================
# Construction
# ============================================================================

def _orient(
    estimate: JointEstimate,
    movable_center: np.ndarray,
    base_center: np.ndarray,
    convention: SignConvention,
) -> JointEstimate:
    if convention is SignConvention.CCW_ABOUT_UP and estimate.kind is JointKind.REVOLUTE:
        return estimate.flipped() if estimate.axis[2] < 0.0 else estimate
    outward = movable_center - base_center
    if estimate.kind is JointKind.PRISMATIC:
        velocity = estimate.axis
    else:
        velocity = np.cross(estimate.axis, movable_center - estimate.pivot)
    return estimate.flipped() if float(velocity @ outward) < 0.0 else estimate


def build_twin(
    cloud0: PointCloud,
    cloud1: PointCloud,
    mask: SegmentationMask,
    joint: JointSpec,
    *,
    slab: float = HULL_SLAB,
    observed_displacement: float = 0.0,
    name: str = "twin",
    category: str = "",
) -> TwinModel:
    """Hull the static and moved points of ``cloud1`` and attach ``joint``.

    The movable hull sits where the link was observed after the push, so
    the joint's zero is that post-push configuration.
    """

    if len(mask.moved0) != len(cloud0) or len(mask.moved1) != len(cloud1):
        raise ValidationError("mask does not match the clouds", field_path="twin.mask")
    moved = cloud1.points[mask.moved1]
    static = cloud1.points[~mask.moved1]
    if len(moved) < MIN_MOVED_POINTS:
        raise InsufficientMotionError(
            f"mask has {len(moved)} moved points", moved0=int(mask.moved0.sum()), moved1=len(moved)
        )
    obj = ArticulatedObject(
        base=(link_hull(static, slab=slab, name="base_hull"),),
        movable=(link_hull(moved, slab=slab, name="movable_hull"),),
        joint=joint.with_state(0.0),
        name=name,
        category=category,
    )
    return TwinModel(object=obj, observed_displacement=observed_displacement)


def estimate_twin(
    cloud0: PointCloud,
    cloud1: PointCloud,
    *,
    config: TwinConfig | None = None,
    convention: SignConvention = SignConvention.AWAY_FROM_BASE,
    allow_static_fallback: bool = False,
    name: str = "twin",
    category: str = "",
) -> TwinModel:
    """Full reconstruction: segment, register, decompose, classify, build.

    Both clouds are centred on the first cloud's centroid for the
    computation and the twin is placed back with its object pose.

    Raises:
        InsufficientMotionError: Nothing moved and no fallback was allowed.
        RegistrationError: ICP did not converge.
        HullError: A link has fewer than 4 points.
    """

    config = config or TwinConfig()
    _, offset = normalize_center(cloud0)
    centered0 = cloud0.translate(-offset)
    centered1 = cloud1.translate(-offset)
    tau = config.effective_tau
    try:
        mask = segment_moving(
            centered0, centered1, tau, cleanup_k=config.cleanup_k, min_moved=config.min_moved
        )
    except InsufficientMotionError:
        if not allow_static_fallback:
            raise
        logger.info("No motion observed; building the static fallback twin")
        return static_twin(cloud1, config=config, name=name, category=category)

    registration = register_segments(
        centered0.subset(mask.moved0),
        centered1.subset(mask.moved1),
        max_iterations=config.icp_iterations,
        tolerance=config.icp_tolerance,
        trim=config.trim,
    )
    screw = screw_decompose(registration.transform)
    estimate = classify_joint(screw, config.theta_min)
    moved = centered1.points[mask.moved1]
    static = centered1.points[~mask.moved1]
    if len(static) == 0:
        raise HullError("every observed point moved; no base geometry left")
    estimate = _orient(estimate, moved.mean(axis=0), static.mean(axis=0), convention)
    low_confidence = estimate.low_confidence or (
        estimate.kind is JointKind.PRISMATIC and abs(estimate.displacement) < 2.0 * tau
    )

    joint_range = config.joint_range(estimate.kind)
    joint = JointSpec(
        kind=estimate.kind,
        axis=estimate.axis / np.linalg.norm(estimate.axis),
        pivot=estimate.pivot,
        limits=(-joint_range, joint_range),
        state=0.0,
    )
    twin = build_twin(
        centered0,
        centered1,
        mask,
        joint,
        slab=config.slab,
        observed_displacement=float(estimate.displacement),
        name=name,
        category=category,
    )
    twin = replace(
        twin,
        object=replace(twin.object, pose=RigidTransform.from_translation(offset)),
        screw=screw,
        low_confidence=low_confidence,
        moved_counts=mask.moved_counts,
        residual=registration.residual,
    )
    logger.info(
        "Twin %s: %s joint, observed displacement %.4f%s",
        name,
        estimate.kind.value,
        estimate.displacement,
        " (low confidence)" if low_confidence else "",
    )
    return twin


def static_twin(
    cloud: PointCloud,
    *,
    config: TwinConfig | None = None,
    name: str = "twin",
    category: str = "",
) -> TwinModel:
    """Twin built without interaction.

    The joint is prismatic along the camera's horizontal viewing direction,
    pointing back at the camera, and the camera-near half of the cloud is
    the movable link.
    """

    config = config or TwinConfig()
    camera = cloud.provenance.camera if cloud.provenance is not None else None
    if camera is None:
        raise ReconstructionError("static fallback needs the camera pose in the cloud provenance")
    toward = -np.asarray(camera.forward, dtype=float)
    toward[2] = 0.0
    norm = float(np.linalg.norm(toward))
    if norm < 1e-9:
        raise ReconstructionError("camera looks straight down; no horizontal viewing direction")
    axis = toward / norm
    _, offset = normalize_center(cloud)
    points = cloud.points - offset
    depth = points @ axis
    near = depth > np.median(depth)
    obj = ArticulatedObject(
        base=(link_hull(points[~near], slab=config.slab, name="base_hull"),),
        movable=(link_hull(points[near], slab=config.slab, name="movable_hull"),),
        joint=JointSpec(
            kind=JointKind.PRISMATIC,
            axis=axis,
            limits=(-config.prismatic_range, config.prismatic_range),
            state=0.0,
        ),
        pose=RigidTransform.from_translation(offset),
        name=name,
        category=category,
    )
    return TwinModel(
        object=obj, observed_displacement=0.0, low_confidence=True, static_fallback=True
    )


# ============================================================================
# Replay
# ============================================================================

def replay_push(
    twin: TwinModel,
    robot: KinematicChain,
    waypoints: Sequence[np.ndarray],
    *,
    table_height: float = 0.0,
) -> float:
    """Replay a joint-space push on the twin from its pre-push state.

    Returns the joint displacement the twin reproduces.
    """

    path = [np.asarray(q, dtype=float) for q in waypoints]
    if len(path) < 2:
        raise ValidationError("a push needs at least two waypoints", field_path="replay.waypoints")
    start = twin.object.joint.clamp(-twin.observed_displacement)
    scene = Scene(
        object=twin.object.with_state(start),
        robot=robot,
        q0=path[0],
        table_height=table_height,
        scene_id=f"{twin.object.name}-replay",
    )
    state = SimState(q=path[0], s=start)
    for before, after in zip(path, path[1:]):
        for delta in split_motion(after - before):
            state = step(scene, state, delta)
    reproduced = state.s - start
    logger.debug("Replay reproduced %.4f of observed %.4f", reproduced, twin.observed_displacement)
    return reproduced
