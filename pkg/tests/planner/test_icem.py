from __future__ import annotations

import numpy as np
import pytest

from desktwin.bench.generators import drawer_object
from desktwin.model.chain import cartesian_gantry
from desktwin.model.scene import Scene
from desktwin.planner.config import ICEMConfig, PlanContext, RewardWeights
from desktwin.planner.icem import (
    evaluate_rollouts,
    fit_elites,
    icem_optimize,
    icem_replan,
    rollout_rewards,
    shift_sequences,
)
from desktwin.sim.simulator import initial_state

TARGET = 0.02


def _quadratic(sequences: np.ndarray) -> np.ndarray:
    return -((np.asarray(sequences) - TARGET) ** 2).sum(axis=(1, 2))


def _small_config(**overrides) -> ICEMConfig:
    return ICEMConfig(**{"population": 64, "elites": 8, "horizon": 5, "iterations": 4, **overrides})


def _drawer_scene() -> Scene:
    q0 = np.array([0.4, 0.0, 0.08, 0.0])
    q0[:3] -= np.array([0.55, 0.0, 0.45])
    return Scene(object=drawer_object(0.4, 0.3, 0.15, state=0.1), robot=cartesian_gantry(), q0=q0)


def test_shift_drops_first_step_and_repeats_last() -> None:
    sequences = np.arange(6, dtype=float).reshape(1, 3, 2)

    shifted = shift_sequences(sequences)

    assert np.array_equal(shifted[0], [[2.0, 3.0], [4.0, 5.0], [4.0, 5.0]])
    assert np.array_equal(shift_sequences(np.ones((1, 2))), np.ones((1, 2)))


def test_fit_elites_orders_best_first_and_floors_std() -> None:
    population = np.array([[[0.0]], [[1.0]], [[1.0]], [[2.0]]])
    returns = np.array([0.0, 5.0, 5.0, 3.0])

    elites, mean, std = fit_elites(population, returns, 2, min_std=0.1)

    assert np.array_equal(elites[:, 0, 0], [1.0, 1.0])
    assert mean[0, 0] == pytest.approx(1.0)
    assert std[0, 0] == pytest.approx(0.1)


def test_fit_elites_momentum_blends_previous_distribution() -> None:
    population = np.array([[[1.0]], [[1.0]]])

    _, mean, std = fit_elites(
        population,
        np.zeros(2),
        2,
        min_std=0.01,
        previous_mean=np.zeros((1, 1)),
        previous_std=np.ones((1, 1)),
        momentum=0.5,
    )

    assert mean[0, 0] == pytest.approx(0.5)
    assert std[0, 0] == pytest.approx(0.5)


def test_optimizer_improves_a_quadratic() -> None:
    cfg = _small_config()

    result = icem_optimize(_quadratic, 5, 2, cfg, seed=0)

    assert result.best.shape == (5, 2)
    assert result.elites.shape == (8, 5, 2)
    assert np.all(np.diff(result.history) >= 0.0)
    assert result.best_return > float(_quadratic(np.zeros((1, 5, 2)))[0])
    assert result.best_return == pytest.approx(float(_quadratic(result.best[None])[0]))
    assert result.evaluations == sum(cfg.population_at(i) for i in range(4))
    assert np.all(np.abs(result.best) <= cfg.bound)


def test_optimizer_is_deterministic_per_seed() -> None:
    cfg = _small_config()

    first = icem_optimize(_quadratic, 5, 2, cfg, seed=4)
    second = icem_optimize(_quadratic, 5, 2, cfg, seed=4)
    other = icem_optimize(_quadratic, 5, 2, cfg, seed=5)

    assert np.array_equal(first.best, second.best)
    assert first.history == second.history
    assert not np.array_equal(first.best, other.best)


def test_warm_start_never_loses_the_shifted_best() -> None:
    cfg = _small_config(iterations=1)
    previous = icem_optimize(_quadratic, 5, 2, _small_config(), seed=0)

    result = icem_optimize(_quadratic, 5, 2, cfg, seed=1, previous=previous)

    shifted_best = shift_sequences(previous.best)
    assert result.best_return >= float(_quadratic(shifted_best[None])[0])


def test_rollout_returns_match_per_step_rewards() -> None:
    scene = _drawer_scene()
    state = initial_state(scene)
    ctx = PlanContext(0.1, 0.05)
    weights = RewardWeights()
    sequences = np.zeros((2, 3, 4))
    sequences[1, :, 0] = -0.02

    returns = evaluate_rollouts(scene, state, sequences, ctx, weights)
    threaded = evaluate_rollouts(scene, state, sequences, ctx, weights, workers=2)

    assert np.array_equal(returns, threaded)
    for sequence, value in zip(sequences, returns):
        steps = rollout_rewards(scene, state, sequence, ctx, weights)
        assert len(steps) == 3
        assert value == pytest.approx(sum(step.total for step in steps))


def test_replan_on_a_scene_returns_joint_space_sequences() -> None:
    scene = _drawer_scene()
    cfg = ICEMConfig(population=20, elites=4, horizon=3, iterations=2)

    result = icem_replan(
        scene, initial_state(scene), None, PlanContext(0.1, 0.05), cfg, RewardWeights(), seed=2
    )

    assert result.best.shape == (3, 4)
    assert result.evaluations == cfg.population_at(0) + cfg.population_at(1)


def test_optimizer_recovers_the_quadratic_optimum_at_full_budget() -> None:
    cfg = ICEMConfig(population=300, elites=20, horizon=1, iterations=3)

    result = icem_optimize(_quadratic, 1, 2, cfg, seed=0)

    assert result.best == pytest.approx(np.full((1, 2), TARGET), abs=1e-2)
    assert result.mean == pytest.approx(np.full((1, 2), TARGET), abs=1e-2)


def test_elite_set_as_large_as_the_population_stays_finite() -> None:
    cfg = ICEMConfig(population=16, elites=16, horizon=3, iterations=3)

    result = icem_optimize(_quadratic, 3, 2, cfg, seed=7)

    assert all(cfg.population_at(i) == 16 for i in range(3))
    assert result.elites.shape == (16, 3, 2)
    assert result.evaluations == 48
    assert np.all(np.isfinite(result.mean))
    assert np.all(np.isfinite(result.elites.var(axis=0)))

    _, _, std = fit_elites(result.elites, np.zeros(16), 16, min_std=cfg.min_std)
    assert np.all(np.isfinite(std))
    assert np.all(std >= cfg.min_std)
