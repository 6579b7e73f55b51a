"""Reward-term and interactive-perception ablations over five fixed tasks."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, Sequence

from ..config import ConfigBundle
from ..planner.config import RewardWeights
from .episode import EpisodeResult, run_episode, sample_target
from .generators import Category, generate_scene

logger = logging.getLogger(__name__)


class AblationMode(str, Enum):
    FULL = "full"
    NO_SUCCESS = "no_success"
    NO_TARGET = "no_target"
    NO_CONTACT = "no_contact"
    NO_DIST = "no_dist"
    NO_REG = "no_reg"
    NO_INTERACTIVE_PERCEPTION = "no_interactive_perception"


# Weights zeroed by each reward-term mode.
ZEROED_WEIGHTS: Dict[AblationMode, tuple[str, ...]] = {
    AblationMode.NO_SUCCESS: ("success",),
    AblationMode.NO_TARGET: ("target",),
    AblationMode.NO_CONTACT: ("contact", "collision"),
    AblationMode.NO_DIST: ("distance",),
    AblationMode.NO_REG: ("action", "velocity"),
}


@dataclass(frozen=True)
class AblationTask:
    name: str
    category: Category
    sign: float
    # Start state as a fraction of the joint range.
    start: float


ABLATION_TASKS = (
    AblationTask("open-drawer", Category.DRAWER, 1.0, 0.25),
    AblationTask("close-drawer", Category.DRAWER, -1.0, 0.75),
    AblationTask("open-laptop", Category.LAPTOP, 1.0, 0.25),
    AblationTask("close-laptop", Category.LAPTOP, -1.0, 0.75),
    AblationTask("turn-faucet", Category.FAUCET, 1.0, 0.5),
)


@dataclass(frozen=True)
class AblationResult:
    mode: AblationMode
    results: tuple[EpisodeResult, ...]

    @property
    def tasks(self) -> int:
        return len(self.results)

    @property
    def successes(self) -> int:
        return sum(1 for item in self.results if item.success)

    @property
    def mean_steps(self) -> float | None:
        """Mean steps to success over the successful tasks."""

        steps = [item.steps for item in self.results if item.success]
        return sum(steps) / len(steps) if steps else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "tasks": self.tasks,
            "successes": self.successes,
            "mean_steps": self.mean_steps,
            "episodes": [item.to_row() for item in self.results],
        }


def ablated_bundle(mode: AblationMode | str, bundle: ConfigBundle) -> ConfigBundle:
    """``bundle`` with the ablation applied."""

    mode = AblationMode(mode)
    if mode is AblationMode.NO_INTERACTIVE_PERCEPTION:
        return replace(bundle, bench=replace(bundle.bench, interactive=False))
    zeroed = ZEROED_WEIGHTS.get(mode, ())
    weights: RewardWeights = replace(bundle.reward, **{name: 0.0 for name in zeroed})
    return replace(bundle, reward=weights)


def run_ablation(
    mode: AblationMode | str,
    bundle: ConfigBundle | None = None,
    seed: int = 0,
    *,
    tasks: Sequence[AblationTask] = ABLATION_TASKS,
) -> AblationResult:
    """Run the task set under one ablation mode.

    Scenes, start states and targets depend only on ``seed`` and the task,
    so every mode faces the same tasks.
    """

    mode = AblationMode(mode)
    bundle = ablated_bundle(mode, bundle or ConfigBundle.desk())
    results = []
    for index, task in enumerate(tasks):
        task_seed = seed + index
        scene = generate_scene(task.category, task_seed)
        joint = scene.object.joint
        scene = scene.with_state(joint.lower + task.start * (joint.upper - joint.lower))
        delta = sample_target(scene, bundle.bench, task_seed, sign=task.sign)
        logger.info("Ablation %s task %s: target %.4f", mode.value, task.name, delta)
        results.append(run_episode(scene, delta, bundle, task_seed))
    outcome = AblationResult(mode, tuple(results))
    logger.info("Ablation %s: %d/%d successes", mode.value, outcome.successes, outcome.tasks)
    return outcome
