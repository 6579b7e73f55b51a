"""Procedural desk scenes: drawers, laptops and faucets.

Every object stands on the table at height zero with its front (+x of the
object frame) facing the robot, rotated by a random yaw. Dimension ranges
are in meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np
from scipy.spatial.transform import Rotation

from ..model.articulation import ArticulatedObject, JointKind, JointSpec
from ..model.chain import KinematicChain, cartesian_gantry
from ..model.geometry import RigidGeometry, RigidTransform
from ..model.scene import Scene
from ..shared.error_handling import ValidationError

WALL = 0.015
DRAWER_GAP = 0.004
DRAWER_LIP = 0.035
PANEL_THICKNESS = 0.018
LAPTOP_BASE_THICKNESS = 0.02
LAPTOP_LID_THICKNESS = 0.008
FAUCET_HANDLE_LIFT = 0.02
FAUCET_HANDLE_HEIGHT = 0.025
YAW_RANGE_DEG = 30.0
# Keeps the sampled start state away from the limits so both directions stay open.
STATE_MARGIN = 0.15


class Category(str, Enum):
    DRAWER = "drawer"
    LAPTOP = "laptop"
    FAUCET = "faucet"


@dataclass(frozen=True)
class DimensionRanges:
    drawer_width: tuple[float, float] = (0.30, 0.45)
    drawer_depth: tuple[float, float] = (0.25, 0.35)
    drawer_height: tuple[float, float] = (0.12, 0.20)
    laptop_length: tuple[float, float] = (0.22, 0.30)
    laptop_width: tuple[float, float] = (0.30, 0.36)
    faucet_radius: tuple[float, float] = (0.025, 0.035)
    faucet_height: tuple[float, float] = (0.10, 0.16)
    faucet_handle: tuple[float, float] = (0.08, 0.14)
    placement_x: tuple[float, float] = (0.0, 0.12)
    placement_y: tuple[float, float] = (-0.1, 0.1)


def _uniform(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    return float(rng.uniform(bounds[0], bounds[1]))


def _placement(rng: np.random.Generator, ranges: DimensionRanges) -> RigidTransform:
    yaw = math.radians(float(rng.uniform(-YAW_RANGE_DEG, YAW_RANGE_DEG)))
    translation = (_uniform(rng, ranges.placement_x), _uniform(rng, ranges.placement_y), 0.0)
    return RigidTransform.from_rpy((0.0, 0.0, yaw), translation)


def _start_state(rng: np.random.Generator, limits: tuple[float, float]) -> float:
    lo, hi = limits
    span = hi - lo
    return float(rng.uniform(lo + STATE_MARGIN * span, hi - STATE_MARGIN * span))


# ============================================================================
# Objects
# ============================================================================

def drawer_object(
    width: float,
    depth: float,
    height: float,
    *,
    pose: RigidTransform | None = None,
    state: float = 0.0,
    name: str = "drawer",
) -> ArticulatedObject:
    """Five-box shell with an open-top tray sliding along +x.

    The front panel rises ``DRAWER_LIP`` above the shell so the fingertip
    can pull the drawer by pressing the back of the lip from above.
    """

    hx, hy = depth / 2.0, width / 2.0
    shell = (
        RigidGeometry.box_from_bounds((-hx, -hy, 0.0), (hx, hy, WALL), name="shell_bottom"),
        RigidGeometry.box_from_bounds(
            (-hx, -hy, height - WALL), (hx, hy, height), name="shell_top"
        ),
        RigidGeometry.box_from_bounds(
            (-hx, -hy, WALL), (hx, -hy + WALL, height - WALL), name="shell_right"
        ),
        RigidGeometry.box_from_bounds(
            (-hx, hy - WALL, WALL), (hx, hy, height - WALL), name="shell_left"
        ),
        RigidGeometry.box_from_bounds(
            (-hx, -hy + WALL, WALL), (-hx + WALL, hy - WALL, height - WALL), name="shell_back"
        ),
    )
    inner_y = hy - WALL - DRAWER_GAP
    back = -hx + WALL + DRAWER_GAP
    floor = WALL + DRAWER_GAP
    rim = height - WALL - DRAWER_GAP
    tray = (
        RigidGeometry.box_from_bounds(
            (hx, -hy + WALL, floor),
            (hx + PANEL_THICKNESS, hy - WALL, height + DRAWER_LIP),
            name="front_panel",
        ),
        RigidGeometry.box_from_bounds(
            (back, -inner_y, floor), (hx, inner_y, floor + WALL), name="tray_bottom"
        ),
        RigidGeometry.box_from_bounds(
            (back, -inner_y, floor), (back + WALL, inner_y, rim), name="tray_back"
        ),
        RigidGeometry.box_from_bounds(
            (back, -inner_y, floor), (hx, -inner_y + WALL, rim), name="tray_right"
        ),
        RigidGeometry.box_from_bounds(
            (back, inner_y - WALL, floor), (hx, inner_y, rim), name="tray_left"
        ),
    )
    travel = round(0.8 * (depth - WALL), 3)
    joint = JointSpec(
        kind=JointKind.PRISMATIC, axis=np.array([1.0, 0.0, 0.0]), limits=(0.0, travel), state=state
    )
    return ArticulatedObject(
        base=shell,
        movable=tray,
        joint=joint,
        pose=pose or RigidTransform.identity(),
        name=name,
        category=Category.DRAWER.value,
    )


def laptop_object(
    length: float,
    width: float,
    *,
    pose: RigidTransform | None = None,
    state: float = 0.0,
    name: str = "laptop",
) -> ArticulatedObject:
    """Base slab with a lid hinged along its back edge; zero is closed."""

    hx, hy = length / 2.0, width / 2.0
    base = (
        RigidGeometry.box_from_bounds(
            (-hx, -hy, 0.0), (hx, hy, LAPTOP_BASE_THICKNESS), name="keyboard"
        ),
    )
    lid = (
        RigidGeometry.box_from_bounds(
            (-hx, -hy, LAPTOP_BASE_THICKNESS),
            (hx, hy, LAPTOP_BASE_THICKNESS + LAPTOP_LID_THICKNESS),
            name="lid",
        ),
    )
    joint = JointSpec(
        kind=JointKind.REVOLUTE,
        axis=np.array([0.0, -1.0, 0.0]),
        pivot=np.array([-hx, 0.0, LAPTOP_BASE_THICKNESS]),
        limits=(0.0, 2.0),
        state=state,
    )
    return ArticulatedObject(
        base=base,
        movable=lid,
        joint=joint,
        pose=pose or RigidTransform.identity(),
        name=name,
        category=Category.LAPTOP.value,
    )


def faucet_object(
    radius: float,
    height: float,
    handle_length: float,
    *,
    pose: RigidTransform | None = None,
    state: float = 0.0,
    name: str = "faucet",
) -> ArticulatedObject:
    """Prism body with a lever on a hub turning about the vertical axis."""

    body = (RigidGeometry.cylinder_hull(radius, height, segments=16, name="body"),)
    top = height + FAUCET_HANDLE_LIFT + FAUCET_HANDLE_HEIGHT
    hub = 0.6 * radius
    lever = (
        RigidGeometry.box_from_bounds((-hub, -hub, height), (hub, hub, top), name="hub"),
        RigidGeometry.box_from_bounds(
            (0.0, -0.008, height + FAUCET_HANDLE_LIFT), (handle_length, 0.008, top), name="lever"
        ),
    )
    joint = JointSpec(
        kind=JointKind.REVOLUTE,
        axis=np.array([0.0, 0.0, 1.0]),
        pivot=np.zeros(3),
        limits=(-math.pi / 2.0, math.pi / 2.0),
        state=state,
    )
    return ArticulatedObject(
        base=body,
        movable=lever,
        joint=joint,
        pose=pose or RigidTransform.identity(),
        name=name,
        category=Category.FAUCET.value,
    )


# ============================================================================
# Scenes
# ============================================================================

def _scene(obj: ArticulatedObject, robot: KinematicChain | None, scene_id: str) -> Scene:
    return Scene(
        object=obj,
        robot=robot or cartesian_gantry(),
        scene_id=scene_id,
        category=obj.category,
    )


def drawer_scene(
    seed: int, *, ranges: DimensionRanges | None = None, robot: KinematicChain | None = None
) -> Scene:
    ranges = ranges or DimensionRanges()
    rng = np.random.default_rng([seed, 0])
    width = _uniform(rng, ranges.drawer_width)
    depth = _uniform(rng, ranges.drawer_depth)
    height = _uniform(rng, ranges.drawer_height)
    pose = _placement(rng, ranges)
    obj = drawer_object(width, depth, height, pose=pose, name=f"drawer-{seed:03d}")
    obj = obj.with_state(_start_state(rng, obj.joint.limits))
    return _scene(obj, robot, obj.name)


def laptop_scene(
    seed: int, *, ranges: DimensionRanges | None = None, robot: KinematicChain | None = None
) -> Scene:
    ranges = ranges or DimensionRanges()
    rng = np.random.default_rng([seed, 1])
    length = _uniform(rng, ranges.laptop_length)
    width = _uniform(rng, ranges.laptop_width)
    pose = _placement(rng, ranges)
    obj = laptop_object(length, width, pose=pose, name=f"laptop-{seed:03d}")
    obj = obj.with_state(_start_state(rng, obj.joint.limits))
    return _scene(obj, robot, obj.name)


def faucet_scene(
    seed: int, *, ranges: DimensionRanges | None = None, robot: KinematicChain | None = None
) -> Scene:
    ranges = ranges or DimensionRanges()
    rng = np.random.default_rng([seed, 2])
    radius = _uniform(rng, ranges.faucet_radius)
    height = _uniform(rng, ranges.faucet_height)
    handle = _uniform(rng, ranges.faucet_handle)
    pose = _placement(rng, ranges)
    obj = faucet_object(radius, height, handle, pose=pose, name=f"faucet-{seed:03d}")
    obj = obj.with_state(_start_state(rng, obj.joint.limits))
    return _scene(obj, robot, obj.name)


GENERATORS: dict[Category, Callable[..., Scene]] = {
    Category.DRAWER: drawer_scene,
    Category.LAPTOP: laptop_scene,
    Category.FAUCET: faucet_scene,
}


def generate_scene(category: Category | str, seed: int, **kwargs) -> Scene:
    """Ground-truth scene of ``category`` fully determined by ``seed``."""

    try:
        key = Category(category)
    except ValueError as exc:
        raise ValidationError(
            f"unknown category '{category}'", field_path="bench.category"
        ) from exc
    return GENERATORS[key](seed, **kwargs)


def tool_reach_drawer_scene(seed: int = 0, *, robot: KinematicChain | None = None) -> Scene:
    """Drawer facing away from the robot, its lip beyond the bare fingertip.

    Opening it means pushing the lip away from the robot, which only a
    tool reaching past the gantry's x travel can do.
    """

    rng = np.random.default_rng([seed, 3])
    depth = 0.3
    pose = RigidTransform.from_rpy(
        (0.0, 0.0, math.pi), (-0.45, float(rng.uniform(-0.05, 0.05)), 0.0)
    )
    obj = drawer_object(0.36, depth, 0.14, pose=pose, state=0.02, name=f"drawer-far-{seed:03d}")
    return _scene(obj, robot, obj.name)


# ============================================================================
# Perturbation
# ============================================================================

def axis_jitter(scene: Scene, degrees: float, seed: int) -> Scene:
    """Tilt the ground-truth joint axis by ``degrees`` about a random perpendicular.

    Emulates unmodelled effects such as rail play or a bent hinge; zero
    returns the scene unchanged.
    """

    if degrees == 0.0:
        return scene
    joint = scene.object.joint
    rng = np.random.default_rng([seed, 7])
    helper = rng.normal(size=3)
    perpendicular = np.cross(joint.axis, helper)
    perpendicular /= np.linalg.norm(perpendicular)
    rotation = Rotation.from_rotvec(perpendicular * math.radians(degrees)).as_matrix()
    axis = rotation @ joint.axis
    jittered = replace(joint, axis=axis / np.linalg.norm(axis))
    return scene.with_object(replace(scene.object, joint=jittered))
