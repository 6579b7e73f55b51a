"""Five-term manipulation reward."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..model.scene import Scene
from ..sim.kinematics import forward_kinematics
from ..sim.simulator import ContactFlag, SimState
from .config import PlanContext, RewardWeights


@dataclass(frozen=True)
class RewardBreakdown:
    success: float
    target: float
    contact: float
    distance: float
    regularization: float

    @property
    def total(self) -> float:
        return self.success + self.target + self.contact + self.distance + self.regularization

    def to_dict(self) -> Dict[str, float]:
        return {
            "success": self.success,
            "target": self.target,
            "contact": self.contact,
            "distance": self.distance,
            "regularization": self.regularization,
            "total": self.total,
        }


def grasp_point(scene: Scene, q: np.ndarray) -> np.ndarray:
    """Fingertip center, or the tool's working tip when a tool is attached."""

    return forward_kinematics(scene.robot, q, check_limits=False).grasp_point


def reward(
    state_before: SimState,
    action: np.ndarray,
    state_after: SimState,
    ctx: PlanContext,
    w: RewardWeights,
    *,
    scene: Scene,
) -> RewardBreakdown:
    """Reward of the transition ``state_before -> state_after`` under ``action``.

    Regularization charges the executed motion, so a truncated ``action`` costs
    only what the robot actually moved.
    """

    s = state_after.s
    remaining = ctx.s_target - s
    success = w.success if abs(remaining) < w.epsilon else 0.0

    ratio = remaining / ctx.delta
    if w.clamp_target:
        ratio = min(1.0, max(0.0, ratio))
    target = -w.target * ratio

    if state_after.contact is ContactFlag.UNEXPECTED_COLLISION:
        contact = -w.collision
    elif abs(remaining) / abs(ctx.delta) < 1.0:
        contact = w.contact
    else:
        contact = 0.0

    offset = scene.object.movable_center(s) - grasp_point(scene, state_after.q)
    distance = -w.distance * float(offset @ offset)

    # Velocity is the executed motion; acceleration its change from the previous step.
    velocity = state_after.q - state_before.q
    acceleration = velocity - state_before.velocity
    regularization = -(
        w.action * float(np.abs(acceleration).sum())
        + w.velocity * float(np.abs(velocity).sum())
    )
    return RewardBreakdown(success, target, contact, distance, regularization)
