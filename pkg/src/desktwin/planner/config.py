"""Reward weights, optimizer budget and per-task planning context."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..shared.error_handling import PlanningError, ValidationError
from ..sim.simulator import ACTION_BOUND


@dataclass(frozen=True)
class RewardWeights:
    """Weights of the five reward terms.

    ``clamp_target`` bounds the target-progress ratio to ``[0, 1]``; without
    it overshooting the target is rewarded.
    """

    success: float = 20.0
    epsilon: float = 0.005
    target: float = 50.0
    contact: float = 10.0
    collision: float = 60.0
    distance: float = 10.0
    action: float = 0.01
    velocity: float = 0.03
    clamp_target: bool = True

    def __post_init__(self) -> None:
        for name in ("success", "target", "contact", "collision", "distance", "action", "velocity"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValidationError(
                    f"{name} weight must be >= 0", field_path=f"reward.{name}", invalid_value=value
                )
        if not self.epsilon > 0.0:
            raise ValidationError(
                "epsilon must be > 0", field_path="reward.epsilon", invalid_value=self.epsilon
            )

    def scaled(self, factor: float) -> "RewardWeights":
        """All weights times ``factor``; the success threshold is unchanged."""

        if factor <= 0.0:
            raise ValidationError("scale factor must be positive", field_path="reward.scale")
        return replace(
            self,
            success=self.success * factor,
            target=self.target * factor,
            contact=self.contact * factor,
            collision=self.collision * factor,
            distance=self.distance * factor,
            action=self.action * factor,
            velocity=self.velocity * factor,
        )


@dataclass(frozen=True)
class ICEMConfig:
    """Sampling-based MPC budget.

    Attributes:
        population: Samples per optimizer iteration before decay (N).
        elites: Elite set size (K).
        horizon: Planning horizon in steps (h).
        max_steps: Episode step budget (T).
        iterations: Optimizer iterations per replan.
        beta: Colored-noise exponent; 0 is white noise.
        population_decay: Population divisor applied per iteration.
        elite_shift: Fraction of the elite set carried into the next sampling round.
        momentum: Weight of the previous mean when refitting.
        init_std: Initial per-component standard deviation.
        min_std: Floor of the refitted standard deviation.
        bound: Per-component action bound.
        seed: Master seed.
        workers: Threads for rollout evaluation; results do not depend on it.
    """

    population: int = 300
    elites: int = 20
    horizon: int = 10
    max_steps: int = 50
    iterations: int = 3
    beta: float = 2.0
    population_decay: float = 1.25
    elite_shift: float = 0.3
    momentum: float = 0.0
    init_std: float = 0.025
    min_std: float = 1e-3
    bound: float = ACTION_BOUND
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        checks = (
            (self.population >= 1, "population", "population must be positive"),
            (1 <= self.elites <= self.population, "elites", "elites must satisfy 1 <= K <= N"),
            (self.horizon >= 1, "horizon", "horizon must be >= 1"),
            (self.max_steps >= 1, "max_steps", "max_steps must be >= 1"),
            (self.iterations >= 1, "iterations", "iterations must be >= 1"),
            (self.beta >= 0.0, "beta", "beta must be >= 0"),
            (self.population_decay >= 1.0, "population_decay", "population_decay must be >= 1"),
            (0.0 <= self.elite_shift <= 1.0, "elite_shift", "elite_shift must lie in [0, 1]"),
            (0.0 <= self.momentum < 1.0, "momentum", "momentum must lie in [0, 1)"),
            (self.min_std > 0.0, "min_std", "min_std must be positive"),
            (self.init_std >= self.min_std, "init_std", "init_std must be >= min_std"),
            (self.bound > 0.0, "bound", "bound must be positive"),
            (self.workers >= 1, "workers", "workers must be positive"),
        )
        for ok, name, message in checks:
            if not ok:
                raise ValidationError(
                    message, field_path=f"icem.{name}", invalid_value=getattr(self, name)
                )

    @classmethod
    def desk(cls, **overrides) -> "ICEMConfig":
        """Reduced budget used by the desk-scale benchmark."""

        return cls(**{"population": 100, "iterations": 2, **overrides})

    @classmethod
    def full(cls, **overrides) -> "ICEMConfig":
        return cls(**overrides)

    def population_at(self, iteration: int) -> int:
        """Samples drawn at ``iteration``: decayed, at least 2K, never above N."""

        decayed = int(self.population / self.population_decay**iteration)
        return min(self.population, max(decayed, 2 * self.elites))


@dataclass(frozen=True)
class PlanContext:
    """Start and goal joint values of one manipulation task."""

    s_initial: float
    s_target: float
    tool_attached: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.s_initial) and math.isfinite(self.s_target)):
            raise PlanningError("joint values must be finite")
        if self.s_target == self.s_initial:
            raise PlanningError(
                "target displacement is zero", context={"s_initial": self.s_initial}
            )

    @property
    def delta(self) -> float:
        return self.s_target - self.s_initial

    def reached(self, s: float, epsilon: float) -> bool:
        return abs(self.s_target - s) < epsilon
