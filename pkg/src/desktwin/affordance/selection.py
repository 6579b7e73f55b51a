"""Executability filtering of push proposals and push execution on a scene."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model.scene import Scene
from ..shared.error_handling import NoExecutableActionError, ValidationError
from ..sim.kinematics import solve_ik
from ..sim.simulator import ContactFlag, SimState, detect_contact, split_motion, step
from .oracle import ActionProposal, AffordanceConfig

logger = logging.getLogger(__name__)

APPROACH_SAMPLES = 5


@dataclass(frozen=True, eq=False)
class PushPlan:
    """A chosen push with fingertip and joint-space waypoints.

    ``fingertip_waypoints`` and ``joint_waypoints`` hold the pre-contact,
    contact and post-push configurations in that order. ``retreat`` backs the
    fingertip off the surface afterwards when reachable.
    """

    proposal: ActionProposal
    fingertip_waypoints: np.ndarray
    joint_waypoints: np.ndarray
    retreat: np.ndarray | None = None

    @property
    def pre_contact(self) -> np.ndarray:
        return self.joint_waypoints[0]

    def to_dict(self) -> dict:
        return {
            "proposal": self.proposal.to_dict(),
            "fingertip_waypoints": self.fingertip_waypoints.tolist(),
            "joint_waypoints": self.joint_waypoints.tolist(),
            "retreat": None if self.retreat is None else self.retreat.tolist(),
        }


def fingertip_waypoints(
    proposal: ActionProposal, radius: float, config: AffordanceConfig
) -> np.ndarray:
    """Pre-contact, contact and post-push fingertip centers ``(3, 3)``."""

    contact = proposal.point + proposal.normal * radius
    pre = contact - proposal.approach * config.approach_distance
    post = contact + proposal.push * config.stroke
    return np.vstack([pre, contact, post])


def _segment_clear(
    scene: Scene, s: float, q_from: np.ndarray, q_to: np.ndarray, samples: int
) -> bool:
    for fraction in np.linspace(0.0, 1.0, samples + 1)[:-1]:
        q = q_from + fraction * (q_to - q_from)
        if detect_contact(scene, SimState(q=q, s=s)).flag is not ContactFlag.NONE:
            return False
    return True


def _transit_samples(q_from: np.ndarray, q_to: np.ndarray, resolution: float) -> int:
    span = float(np.max(np.abs(q_to - q_from), initial=0.0))
    return max(2, int(np.ceil(span / resolution)))


def plan_push(
    proposal: ActionProposal,
    scene: Scene,
    state: SimState,
    *,
    config: AffordanceConfig | None = None,
) -> PushPlan | None:
    """Plan one proposal for the scene's robot, or ``None`` when it is not executable."""

    config = config or AffordanceConfig()
    chain = scene.robot
    targets = fingertip_waypoints(proposal, chain.fingertip_radius, config)
    joints = []
    seed = state.q
    for target in targets:
        q, converged = solve_ik(chain, target, seed)
        if not converged:
            return None
        joints.append(q)
        seed = q
    q_pre, q_contact, _ = joints
    if not chain.within_limits(q_pre):
        return None
    if detect_contact(scene, SimState(q=q_pre, s=state.s)).flag is not ContactFlag.NONE:
        return None
    if not _segment_clear(scene, state.s, q_pre, q_contact, APPROACH_SAMPLES):
        return None
    samples = _transit_samples(state.q, q_pre, config.transit_resolution)
    # The transit starts at the current configuration, which may already touch.
    if not _segment_clear(scene, state.s, q_pre, state.q, samples):
        return None
    retreat_target = targets[2] - proposal.approach * config.approach_distance
    q_retreat, converged = solve_ik(chain, retreat_target, joints[2])
    return PushPlan(
        proposal=proposal,
        fingertip_waypoints=targets,
        joint_waypoints=np.vstack(joints),
        retreat=q_retreat if converged else None,
    )


def select_executable(
    proposals: Sequence[Sequence[ActionProposal]],
    scene: Scene,
    state: SimState,
    *,
    config: AffordanceConfig | None = None,
) -> PushPlan:
    """First executable push, scanning points then proposals in ranked order.

    ``proposals`` holds one list per candidate point, points already sorted
    by descending actionability.

    Raises:
        NoExecutableActionError: Every proposal is unreachable or collides.
    """

    config = config or AffordanceConfig()
    if not proposals or not any(proposals):
        raise ValidationError("no proposals to select from", field_path="affordance.proposals")
    tried = 0
    for point_rank, point_proposals in enumerate(proposals[: config.n_p]):
        ranked = sorted(point_proposals, key=lambda item: -item.success)[: config.n_a]
        for proposal in ranked:
            tried += 1
            plan = plan_push(proposal, scene, state, config=config)
            if plan is not None:
                logger.info(
                    "Selected push at point rank %d (success %.4f, %d candidates tried)",
                    point_rank,
                    proposal.success,
                    tried,
                )
                return plan
    raise NoExecutableActionError(
        f"none of {tried} proposals is reachable and collision-free",
        context={"tried": tried, "scene": scene.scene_id},
    )


def _follow(scene: Scene, state: SimState, target: np.ndarray) -> tuple[SimState, bool]:
    for delta in split_motion(target - state.q):
        state = step(scene, state, delta)
        if state.contact is ContactFlag.UNEXPECTED_COLLISION:
            return state, False
    return state, True


def execute_push(scene: Scene, state: SimState, plan: PushPlan) -> tuple[SimState, float]:
    """Drive the robot through the plan in action-bound increments.

    An unexpected collision aborts the remaining motion; the partial state
    is returned together with whatever joint motion happened.
    """

    start = state.s
    waypoints = list(plan.joint_waypoints)
    if plan.retreat is not None:
        waypoints.append(plan.retreat)
    for index, target in enumerate(waypoints):
        state, clear = _follow(scene, state, np.asarray(target, dtype=float))
        if not clear:
            logger.warning(
                "Push aborted by an unexpected collision at waypoint %d of %d",
                index + 1,
                len(waypoints),
            )
            break
    displacement = state.s - start
    logger.info("Push moved the joint by %.4f", displacement)
    return state, displacement
