"""Receding-horizon execution: plan on the twin, act on the real scene."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from ..model.scene import Scene
from ..shared.error_handling import PlanningError
from ..shared.observability import MetricsCollector, StructuredLogger
from ..sim.simulator import ContactFlag, SimState, step
from .config import ICEMConfig, PlanContext, RewardWeights
from .icem import ReplanResult, icem_replan
from .reward import RewardBreakdown, reward

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StepRecord:
    t: int
    action: np.ndarray
    belief: SimState
    real: SimState
    reward: RewardBreakdown
    predicted_return: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "action": self.action.tolist(),
            "belief_s": self.belief.s,
            "real_s": self.real.s,
            "q": self.real.q.tolist(),
            "contact": self.real.contact.value,
            "belief_contact": self.belief.contact.value,
            "events": sorted(self.real.events),
            "predicted_return": self.predicted_return,
            "reward": self.reward.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class PlannedTrajectory:
    """Executed actions with the twin's belief and the real outcome per step.

    ``success`` refers to the belief: the twin reached the target within
    ``epsilon`` before the step budget ran out.
    """

    actions: np.ndarray
    records: tuple[StepRecord, ...]
    success: bool
    steps_to_success: int | None
    initial_belief: SimState
    initial_real: SimState
    final_belief: SimState
    final_real: SimState
    unexpected_collisions: int = 0
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return len(self.records)

    @property
    def real_displacement(self) -> float:
        return self.final_real.s - self.initial_real.s


def _step_seed(seed: int, t: int) -> int:
    return int(np.random.SeedSequence([seed, t]).generate_state(1)[0])


def mpc_execute(
    twin_scene: Scene,
    real_scene: Scene,
    twin_state: SimState,
    real_state: SimState,
    ctx: PlanContext,
    cfg: ICEMConfig,
    w: RewardWeights,
    seed: int,
    *,
    trace: StructuredLogger | None = None,
    metrics: MetricsCollector | None = None,
) -> PlannedTrajectory:
    """Run MPC for at most ``cfg.max_steps`` steps.

    The twin's belief advances open-loop by the same actions that are sent
    to the real scene; the real state is never fed back. Reaching the step
    budget without belief success is reported, not raised. The trace depends
    on ``seed`` only, never on ``cfg.workers``.
    """

    if twin_scene.robot.dof != real_scene.robot.dof:
        raise PlanningError("twin and real robots must have the same number of joints")
    metrics = metrics or MetricsCollector()
    belief, real = twin_state, real_state
    previous: ReplanResult | None = None
    records: list[StepRecord] = []
    collisions = 0
    success = ctx.reached(belief.s, w.epsilon)
    for t in range(cfg.max_steps):
        if success:
            break
        with metrics.time("replan"):
            result = icem_replan(twin_scene, belief, previous, ctx, cfg, w, _step_seed(seed, t))
        metrics.increment("rollouts", result.evaluations)
        action = np.clip(result.best[0], -cfg.bound, cfg.bound)
        real_next = step(real_scene, real, action)
        belief_next = step(twin_scene, belief, action)
        breakdown = reward(belief, action, belief_next, ctx, w, scene=twin_scene)
        record = StepRecord(t, action, belief_next, real_next, breakdown, result.best_return)
        records.append(record)
        if trace is not None:
            trace.log("step", **record.to_dict())
        if real_next.contact is ContactFlag.UNEXPECTED_COLLISION:
            collisions += 1
        belief, real = belief_next, real_next
        previous = result
        success = ctx.reached(belief.s, w.epsilon)
        logger.debug(
            "t=%d belief s=%.4f real s=%.4f reward %.3f", t, belief.s, real.s, breakdown.total
        )

    steps_to_success = len(records) if success else None
    if success:
        logger.info("Belief reached the target after %d steps", len(records))
    else:
        logger.info("Step budget of %d exhausted; belief s=%.4f", cfg.max_steps, belief.s)
    actions = np.array([record.action for record in records]).reshape(-1, twin_scene.robot.dof)
    return PlannedTrajectory(
        actions=actions,
        records=tuple(records),
        success=success,
        steps_to_success=steps_to_success,
        initial_belief=twin_state,
        initial_real=real_state,
        final_belief=belief,
        final_real=real,
        unexpected_collisions=collisions,
        metrics=metrics.snapshot(),
    )
