"""Improved cross-entropy method over joint-space action sequences.

Each replan runs a few sampling rounds. A round draws colored-noise
sequences around the current mean, mixes in shifted elites from the
previous replan (first round) or the current elites (later rounds) plus
the best sequence found so far, evaluates them by rollout on the twin and
refits the sampling distribution to the top K.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..model.scene import Scene
from ..sim.simulator import SimState, rollout
from .config import ICEMConfig, PlanContext, RewardWeights
from .noise import sample_population
from .reward import RewardBreakdown, reward

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class ReplanResult:
    """Outcome of one replan.

    Attributes:
        best: Highest-return sequence ``(h, d)``.
        best_return: Its return.
        elites: Final elite set ``(K, h, d)``, best first.
        mean: Final sampling mean ``(h, d)``.
        history: Best return after each round, non-decreasing.
        evaluations: Sequences evaluated in total.
    """

    best: np.ndarray
    best_return: float
    elites: np.ndarray
    mean: np.ndarray
    history: tuple[float, ...] = field(default_factory=tuple)
    evaluations: int = 0


def shift_sequences(sequences: np.ndarray) -> np.ndarray:
    """Drop the executed first step and repeat the last one."""

    shifted = np.roll(np.asarray(sequences, dtype=float), -1, axis=-2)
    if shifted.shape[-2] > 1:
        shifted[..., -1, :] = shifted[..., -2, :]
    return shifted


def fit_elites(
    population: np.ndarray,
    returns: np.ndarray,
    k: int,
    *,
    min_std: float,
    previous_mean: np.ndarray | None = None,
    previous_std: np.ndarray | None = None,
    momentum: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-``k`` elites (best first) and the refitted mean and std.

    Ties are broken by population order.
    """

    order = np.argsort(-np.asarray(returns, dtype=float), kind="stable")[:k]
    elites = population[order]
    mean = elites.mean(axis=0)
    std = elites.std(axis=0)
    if momentum > 0.0 and previous_mean is not None and previous_std is not None:
        mean = momentum * previous_mean + (1.0 - momentum) * mean
        std = momentum * previous_std + (1.0 - momentum) * std
    return elites, mean, np.maximum(std, min_std)


def evaluate_rollouts(
    scene: Scene,
    state: SimState,
    sequences: np.ndarray,
    ctx: PlanContext,
    w: RewardWeights,
    *,
    workers: int = 1,
) -> np.ndarray:
    """Undiscounted return of every sequence rolled out from ``state``.

    Success reward accrues at every step where the target is held.
    """

    def score(sequence: np.ndarray) -> float:
        states = rollout(scene, state, sequence)
        total = 0.0
        before = state
        for action, after in zip(sequence, states):
            total += reward(before, action, after, ctx, w, scene=scene).total
            before = after
        return total

    sequences = np.asarray(sequences, dtype=float)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(score, sequences)))
    return np.array([score(sequence) for sequence in sequences])


def rollout_rewards(
    scene: Scene, state: SimState, sequence: np.ndarray, ctx: PlanContext, w: RewardWeights
) -> list[RewardBreakdown]:
    """Per-step reward breakdown of one rollout."""

    breakdowns = []
    before = state
    for action, after in zip(sequence, rollout(scene, state, sequence)):
        breakdowns.append(reward(before, action, after, ctx, w, scene=scene))
        before = after
    return breakdowns


def icem_optimize(
    evaluate: Evaluator,
    horizon: int,
    dim: int,
    cfg: ICEMConfig,
    seed: int,
    previous: ReplanResult | None = None,
) -> ReplanResult:
    """Maximize ``evaluate`` over sequences ``(h, d)`` within the action bound."""

    if previous is not None:
        mean = shift_sequences(previous.mean)
    else:
        mean = np.zeros((horizon, dim))
    std = np.full((horizon, dim), cfg.init_std)
    carried = max(1, int(math.ceil(cfg.elite_shift * cfg.elites))) if cfg.elite_shift > 0.0 else 0

    best: np.ndarray | None = None
    best_return = -math.inf
    elites: np.ndarray | None = None
    history: list[float] = []
    evaluations = 0
    for iteration in range(cfg.iterations):
        population = sample_population(mean, std, cfg, seed, iteration)
        extras = []
        if iteration == 0 and previous is not None:
            extras.extend(shift_sequences(previous.elites[:carried]))
            extras.append(shift_sequences(previous.best))
        elif elites is not None:
            extras.extend(elites[:carried])
        if best is not None:
            extras.append(best)
        if extras:
            count = min(len(extras), len(population))
            population[:count] = np.clip(np.asarray(extras[:count]), -cfg.bound, cfg.bound)

        returns = np.asarray(evaluate(population), dtype=float)
        evaluations += len(population)
        elites, mean, std = fit_elites(
            population,
            returns,
            cfg.elites,
            min_std=cfg.min_std,
            previous_mean=mean,
            previous_std=std,
            momentum=cfg.momentum,
        )
        index = int(np.argmax(returns))
        if returns[index] > best_return:
            best_return = float(returns[index])
            best = population[index].copy()
        history.append(best_return)

    assert best is not None and elites is not None
    return ReplanResult(
        best=best,
        best_return=best_return,
        elites=elites,
        mean=mean,
        history=tuple(history),
        evaluations=evaluations,
    )


def icem_replan(
    scene: Scene,
    state: SimState,
    previous: ReplanResult | None,
    ctx: PlanContext,
    cfg: ICEMConfig,
    w: RewardWeights,
    seed: int,
) -> ReplanResult:
    """Best ``h``-step sequence from ``state`` on ``scene`` plus the elite set."""

    result = icem_optimize(
        lambda sequences: evaluate_rollouts(scene, state, sequences, ctx, w, workers=cfg.workers),
        cfg.horizon,
        scene.robot.dof,
        cfg,
        seed,
        previous,
    )
    logger.debug(
        "Replan at t=%d: best return %.3f after %d rollouts",
        state.t,
        result.best_return,
        result.evaluations,
    )
    return result
