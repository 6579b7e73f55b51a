from __future__ import annotations

import pytest

from desktwin.bench.ablation import (
    ABLATION_TASKS,
    AblationMode,
    AblationResult,
    AblationTask,
    ablated_bundle,
    run_ablation,
)
from desktwin.bench.episode import EpisodeResult
from desktwin.bench.generators import Category, generate_scene
from desktwin.config import BenchConfig, ConfigBundle
from desktwin.planner.config import ICEMConfig


def test_reward_modes_zero_their_terms() -> None:
    bundle = ConfigBundle()

    no_contact = ablated_bundle("no_contact", bundle).reward
    no_reg = ablated_bundle(AblationMode.NO_REG, bundle).reward

    assert no_contact.contact == 0.0
    assert no_contact.collision == 0.0
    assert no_contact.target == bundle.reward.target
    assert (no_reg.action, no_reg.velocity) == (0.0, 0.0)
    assert ablated_bundle("no_success", bundle).reward.success == 0.0
    assert ablated_bundle("no_target", bundle).reward.target == 0.0
    assert ablated_bundle("no_dist", bundle).reward.distance == 0.0
    assert ablated_bundle("full", bundle) == bundle


def test_perception_mode_disables_interaction() -> None:
    bundle = ablated_bundle("no_interactive_perception", ConfigBundle())

    assert not bundle.bench.interactive
    assert bundle.reward == ConfigBundle().reward


def test_unknown_mode_is_rejected() -> None:
    with pytest.raises(ValueError):
        ablated_bundle("no_everything", ConfigBundle())


def test_five_fixed_tasks_cover_every_category() -> None:
    assert len(ABLATION_TASKS) == 5
    assert {task.category for task in ABLATION_TASKS} == set(Category)


def test_result_summary() -> None:
    results = (
        EpisodeResult("drawer", "a", 0, 0.0, 0.1, 0.1, 0.1, True, 8),
        EpisodeResult("drawer", "b", 1, 0.0, 0.1, 0.1, 0.02, False, 50),
        EpisodeResult("laptop", "c", 2, 0.0, 0.4, 0.4, 0.4, True, 12),
    )

    outcome = AblationResult(AblationMode.FULL, results)

    assert outcome.tasks == 3
    assert outcome.successes == 2
    assert outcome.mean_steps == pytest.approx(10.0)
    assert outcome.to_dict()["mode"] == "full"
    assert AblationResult(AblationMode.NO_DIST, ()).mean_steps is None


def test_ablation_run_uses_fixed_start_states() -> None:
    bundle = ConfigBundle(
        icem=ICEMConfig(population=10, elites=2, horizon=2, iterations=1, max_steps=1),
        bench=BenchConfig(oracle_twin=True),
    )
    task = AblationTask("open-drawer", Category.DRAWER, 1.0, 0.25)

    outcome = run_ablation("full", bundle, seed=3, tasks=(task,))

    (result,) = outcome.results
    joint = generate_scene(Category.DRAWER, 3).object.joint
    assert result.s_initial == pytest.approx(joint.lower + 0.25 * (joint.upper - joint.lower))
    assert 0.05 <= abs(result.delta_target) <= 0.12
    assert result.steps <= 1
    assert outcome.mode is AblationMode.FULL


CLOSE_DRAWER = next(task for task in ABLATION_TASKS if task.name == "close-drawer")


@pytest.fixture(scope="module")
def oracle_outcomes() -> dict[AblationMode, AblationResult]:
    # Short targets keep the closing direction open for any sampled drawer depth.
    bench = BenchConfig(oracle_twin=True, prismatic_delta=(0.05, 0.08))
    bundle = ConfigBundle(icem=ICEMConfig.desk(max_steps=25), bench=bench)
    return {
        mode: run_ablation(mode, bundle, seed=0, tasks=(CLOSE_DRAWER,)) for mode in AblationMode
    }


@pytest.mark.slow
@pytest.mark.integration
def test_oracle_twin_lands_within_ten_percent(
    oracle_outcomes: dict[AblationMode, AblationResult],
) -> None:
    (result,) = oracle_outcomes[AblationMode.FULL].results

    assert result.success
    assert result.stage is None
    assert abs(result.delta_r) < 10.0


@pytest.mark.slow
@pytest.mark.integration
def test_full_reward_does_at_least_as_well_as_every_ablation(
    oracle_outcomes: dict[AblationMode, AblationResult],
) -> None:
    full = oracle_outcomes[AblationMode.FULL]

    assert oracle_outcomes[AblationMode.NO_DIST].successes == 0
    for mode, outcome in oracle_outcomes.items():
        assert full.successes >= outcome.successes, mode.value
