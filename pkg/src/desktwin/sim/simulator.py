"""Quasi-static contact simulator.

A step moves the robot by an incremental joint action. When a pushing
sphere (fingertip or tool) ends up inside the movable link, the joint value
is advanced until the penetration is gone. Pushes the joint cannot absorb
(wrong direction, joint at its limit, contact against base or table) are
resolved by truncating the commanded robot motion instead.

The same functions run the ground-truth world and the planner's twin.
"""
from __future__ import annotations

import logging
import math
import threading
import weakref
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Union

import numpy as np

from ..model.articulation import ArticulatedObject
from ..model.scene import Scene
from ..shared.error_handling import ValidationError
from .collision import Proximity, link_proximity, table_proximity
from .kinematics import LINK, PUSHER, forward_kinematics, robot_spheres

logger = logging.getLogger(__name__)

ACTION_BOUND = 0.05
CONTACT_TOLERANCE = 1e-4
RESOLUTION_ITERATIONS = 32
RESOLUTION_TOLERANCE = 1e-5
TRUNCATION_BISECTIONS = 14

EVENT_ACTION_CLIPPED = "action_clipped"
EVENT_MOTION_TRUNCATED = "motion_truncated"
EVENT_JOINT_LIMIT = "joint_limit"


class ContactFlag(str, Enum):
    NONE = "none"
    FINGERTIP_ON_MOVABLE = "fingertip_on_movable"
    UNEXPECTED_COLLISION = "unexpected_collision"


def _readonly(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SimState:
    """Value-type simulator state.

    Attributes:
        q: Robot joint positions.
        s: Object joint value.
        contact: Contact classification after the last step.
        t: Step index.
        velocity: Joint motion applied by the last step (``q_t - q_{t-1}``).
        events: Step annotations such as ``"motion_truncated"``.
    """

    q: np.ndarray
    s: float
    contact: ContactFlag = ContactFlag.NONE
    t: int = 0
    velocity: np.ndarray | None = None
    events: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        q = _readonly(self.q)
        if self.velocity is None:
            velocity = np.zeros_like(q)
        else:
            velocity = np.array(self.velocity, dtype=float)
        if velocity.shape != q.shape:
            raise ValidationError("velocity must match q", field_path="state.velocity")
        velocity.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "velocity", velocity)
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "contact", ContactFlag(self.contact))
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "events", frozenset(self.events))

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "q": self.q.tolist(),
            "s": self.s,
            "contact": self.contact.value,
            "events": sorted(self.events),
        }


@dataclass(frozen=True, eq=False)
class Action:
    """Incremental joint command; each component within ``[-bound, bound]``."""

    delta_q: np.ndarray
    bound: float = ACTION_BOUND

    def __post_init__(self) -> None:
        delta = _readonly(self.delta_q)
        if delta.ndim != 1:
            raise ValidationError("delta_q must be a vector", field_path="action.delta_q")
        if np.any(np.abs(delta) > self.bound + 1e-12):
            raise ValidationError(
                f"components must lie within +/-{self.bound}", field_path="action.delta_q"
            )
        object.__setattr__(self, "delta_q", delta)

    @classmethod
    def clipped(cls, delta_q: np.ndarray, bound: float = ACTION_BOUND) -> tuple["Action", bool]:
        raw = np.asarray(delta_q, dtype=float)
        clipped = np.clip(raw, -bound, bound)
        return cls(clipped, bound), bool(np.any(clipped != raw))


def split_motion(delta_q: np.ndarray, bound: float = ACTION_BOUND) -> np.ndarray:
    """Equal increments ``(k, d)`` summing to ``delta_q``, each within ``bound``."""

    delta = np.asarray(delta_q, dtype=float)
    count = max(1, int(math.ceil(float(np.max(np.abs(delta), initial=0.0)) / bound - 1e-12)))
    return np.tile(delta / count, (count, 1))


@dataclass(frozen=True, eq=False)
class ContactReport:
    flag: ContactFlag
    witness: np.ndarray
    penetration: float


# ============================================================================
# Per-scene collision context
# ============================================================================

class _SceneContext:
    """Geometry of a scene laid out for sphere queries."""

    def __init__(self, scene: Scene):
        self.scene = scene
        self.object: ArticulatedObject = scene.object
        self.table_height = scene.table_height

    def movable_pose(self, s: float):
        return self.object.pose @ self.object.joint.motion(s)

    def base(self, spheres: np.ndarray) -> Proximity:
        return link_proximity(self.object.base, self.object.pose, spheres)

    def obstacles(self, spheres: np.ndarray) -> Proximity:
        """Base link and table; never legitimately touched by the robot."""

        return self.base(spheres).minimum(table_proximity(self.table_height, spheres))

    def movable(self, spheres: np.ndarray, s: float) -> Proximity:
        return link_proximity(self.object.movable, self.movable_pose(s), spheres)

    def surface_velocity(self, world_point: np.ndarray) -> np.ndarray:
        """World velocity per unit ``ds`` of the movable surface point."""

        # Depends only on the current point for both joint kinds.
        point_object = self.object.pose.inverse().apply(world_point)
        return self.object.pose.apply_vector(self.object.joint.surface_velocity(point_object))


_contexts: "weakref.WeakKeyDictionary[Scene, _SceneContext]" = weakref.WeakKeyDictionary()
_contexts_lock = threading.Lock()


def _context(scene: Scene) -> _SceneContext:
    with _contexts_lock:
        context = _contexts.get(scene)
        if context is None:
            context = _SceneContext(scene)
            _contexts[scene] = context
        return context


# ============================================================================
# Contact detection
# ============================================================================

def _spheres(scene: Scene, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pose = forward_kinematics(scene.robot, q, check_limits=False)
    return robot_spheres(scene.robot, pose)


def _classify(
    context: _SceneContext, spheres: np.ndarray, roles: np.ndarray, s: float
) -> ContactReport:
    obstacles = context.obstacles(spheres)
    movable = context.movable(spheres, s)
    link_rows = roles == LINK
    pusher_rows = roles == PUSHER

    link_movable = np.where(link_rows, movable.distance, np.inf)
    blocking = np.minimum(obstacles.distance, link_movable)
    if np.any(blocking <= CONTACT_TOLERANCE):
        index = int(np.argmin(blocking))
        source = movable if link_movable[index] < obstacles.distance[index] else obstacles
        return ContactReport(
            ContactFlag.UNEXPECTED_COLLISION,
            source.witness[index].copy(),
            max(0.0, -float(blocking[index])),
        )
    touching = pusher_rows & (movable.distance <= CONTACT_TOLERANCE)
    if np.any(touching):
        candidates = np.where(touching, movable.distance, np.inf)
        index = int(np.argmin(candidates))
        return ContactReport(
            ContactFlag.FINGERTIP_ON_MOVABLE,
            movable.witness[index].copy(),
            max(0.0, -float(candidates[index])),
        )
    closest = int(np.argmin(np.minimum(obstacles.distance, movable.distance)))
    source = movable if movable.distance[closest] < obstacles.distance[closest] else obstacles
    witness = source.witness[closest]
    return ContactReport(ContactFlag.NONE, witness.copy(), 0.0)


def detect_contact(scene: Scene, state: SimState) -> ContactReport:
    """Classify robot contact with the scene at ``state``.

    A pushing sphere touching the movable link gives ``fingertip_on_movable``;
    any sphere touching the base or the table, or a link sphere touching the
    movable link, gives ``unexpected_collision`` (which takes precedence).
    """

    spheres, roles = _spheres(scene, state.q)
    return _classify(_context(scene), spheres, roles, state.s)


def initial_state(scene: Scene) -> SimState:
    state = SimState(q=scene.q0, s=scene.object.state)
    report = detect_contact(scene, state)
    return SimState(q=state.q, s=state.s, contact=report.flag)


def clone_state(state: SimState) -> SimState:
    """Independent value copy of ``state``."""

    return SimState(
        q=state.q.copy(),
        s=state.s,
        contact=state.contact,
        t=state.t,
        velocity=state.velocity.copy(),
        events=frozenset(state.events),
    )


# ============================================================================
# Quasi-static resolution
# ============================================================================

@dataclass(frozen=True)
class _Resolution:
    s: float
    residual: float
    at_limit: bool


def _resolve(
    context: _SceneContext,
    pushers: np.ndarray,
    displacement: np.ndarray,
    s: float,
) -> _Resolution:
    """Advance ``s`` until no pusher penetrates the movable link.

    Newton-style fixed point on the scalar joint value using the surface
    velocity at the deepest contact. Fails (positive residual) when the
    push opposes the direction the surface can move, when successive
    contacts disagree on the direction, or when the joint saturates.
    """

    joint = context.object.joint
    s_current = s
    direction = 0.0
    residual = 0.0
    for _ in range(RESOLUTION_ITERATIONS):
        proximity = context.movable(pushers, s_current)
        depth = -proximity.distance
        index = int(np.argmax(depth))
        residual = max(0.0, float(depth[index]))
        if residual <= CONTACT_TOLERANCE:
            return _Resolution(s_current, residual, False)

        normal = proximity.normal[index]
        velocity = context.surface_velocity(proximity.witness[index])
        rate = float(normal @ velocity)
        if abs(rate) < 1e-9:
            return _Resolution(s_current, residual, False)
        sign = -np.sign(rate)
        if direction and sign != direction:
            return _Resolution(s_current, residual, False)
        if float(displacement[index] @ (sign * velocity)) <= 0.0:
            return _Resolution(s_current, residual, False)
        direction = sign

        target = s_current + sign * residual / abs(rate)
        clamped = joint.clamp(target)
        if clamped == s_current:
            return _Resolution(s_current, residual, True)
        step_size = abs(clamped - s_current)
        s_current = clamped
        if step_size < RESOLUTION_TOLERANCE:
            break

    proximity = context.movable(pushers, s_current)
    residual = max(0.0, float(np.max(-proximity.distance)))
    at_limit = s_current in (joint.lower, joint.upper)
    return _Resolution(s_current, residual, at_limit and residual > CONTACT_TOLERANCE)


@dataclass(frozen=True)
class _Trial:
    feasible: bool
    s: float
    at_limit: bool


def step(scene: Scene, state: SimState, action: Union[Action, np.ndarray]) -> SimState:
    """Apply one incremental joint action and resolve contacts quasi-statically.

    Raw arrays are clipped to the action bound (recorded as the
    ``action_clipped`` event). The result always satisfies robot and object
    joint limits.
    """

    events: set[str] = set()
    if isinstance(action, Action):
        delta = np.asarray(action.delta_q, dtype=float)
    else:
        clipped, was_clipped = Action.clipped(action)
        delta = np.asarray(clipped.delta_q, dtype=float)
        if was_clipped:
            events.add(EVENT_ACTION_CLIPPED)
    robot = scene.robot
    if delta.shape != (robot.dof,):
        raise ValidationError(
            f"action must have {robot.dof} components", field_path="action.delta_q"
        )

    context = _context(scene)
    q_before = state.q
    target = robot.clamp(q_before + delta)
    if not np.all(target == q_before + delta):
        events.add(EVENT_JOINT_LIMIT)

    spheres_before, roles = _spheres(scene, q_before)
    pusher_rows = roles == PUSHER
    link_rows = roles == LINK

    # Penetration already present is tolerated but never increased.
    obstacle_allowance = max(
        CONTACT_TOLERANCE, float(np.max(-context.obstacles(spheres_before).distance)) + 1e-9
    )
    movable_before = context.movable(spheres_before, state.s)
    pusher_allowance = max(
        CONTACT_TOLERANCE, float(np.max(-movable_before.distance[pusher_rows])) + 1e-9
    )
    link_allowance = CONTACT_TOLERANCE
    if np.any(link_rows):
        link_allowance = max(
            CONTACT_TOLERANCE, float(np.max(-movable_before.distance[link_rows])) + 1e-9
        )

    # Sub-steps no longer than the smallest pusher radius keep a pusher from
    # tunnelling through thin movable parts within one resolution.
    spheres_target, _ = _spheres(scene, target)
    travel = float(
        np.max(
            np.linalg.norm(
                spheres_target[pusher_rows, :3] - spheres_before[pusher_rows, :3], axis=1
            )
        )
    )
    clearance = float(np.min(movable_before.distance[pusher_rows]))
    substep = float(np.min(spheres_before[pusher_rows, 3]))
    may_touch = clearance <= travel + CONTACT_TOLERANCE

    def attempt(fraction: float) -> _Trial:
        q = q_before + fraction * (target - q_before)
        spheres, _ = _spheres(scene, q)
        if float(np.max(-context.obstacles(spheres).distance)) > obstacle_allowance:
            return _Trial(False, state.s, False)
        count = 1
        if may_touch:
            count = max(1, int(math.ceil(fraction * travel / substep - 1e-12)))
        s = state.s
        previous = spheres_before
        for index in range(1, count + 1):
            if index == count:
                current = spheres
            else:
                partial = fraction * index / count
                current, _ = _spheres(scene, q_before + partial * (target - q_before))
            resolution = _resolve(
                context,
                current[pusher_rows],
                current[pusher_rows, :3] - previous[pusher_rows, :3],
                s,
            )
            if resolution.residual > pusher_allowance:
                return _Trial(False, state.s, resolution.at_limit)
            s = resolution.s
            previous = current
        if np.any(link_rows):
            links = context.movable(spheres[link_rows], s)
            if float(np.max(-links.distance)) > link_allowance:
                return _Trial(False, state.s, resolution.at_limit)
        return _Trial(True, s, resolution.at_limit)

    fraction = 1.0
    trial = attempt(1.0)
    if not trial.feasible:
        events.add(EVENT_MOTION_TRUNCATED)
        if trial.at_limit:
            events.add(EVENT_JOINT_LIMIT)
        lo, hi = 0.0, 1.0
        best = _Trial(True, state.s, False)
        for _ in range(TRUNCATION_BISECTIONS):
            mid = 0.5 * (lo + hi)
            candidate = attempt(mid)
            if candidate.feasible:
                lo, best = mid, candidate
            else:
                hi = mid
        fraction = lo
        trial = best

    q_after = q_before + fraction * (target - q_before)
    s_after = context.object.joint.clamp(trial.s)
    saturated = s_after in (context.object.joint.lower, context.object.joint.upper)
    if trial.at_limit or (saturated and s_after != state.s):
        events.add(EVENT_JOINT_LIMIT)
    spheres_after, _ = _spheres(scene, q_after)
    report = _classify(context, spheres_after, roles, s_after)
    return SimState(
        q=q_after,
        s=s_after,
        contact=report.flag,
        t=state.t + 1,
        velocity=q_after - q_before,
        events=frozenset(events),
    )


def rollout(scene: Scene, state: SimState, actions: np.ndarray) -> list[SimState]:
    """Step through ``actions`` (``(h, d)``) from a copy of ``state``."""

    states = []
    current = clone_state(state)
    for delta in np.asarray(actions, dtype=float):
        current = step(scene, current, delta)
        states.append(current)
    return states
