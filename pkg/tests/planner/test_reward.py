from __future__ import annotations

import numpy as np
import pytest

from desktwin.bench.generators import drawer_object
from desktwin.model.chain import cartesian_gantry
from desktwin.model.scene import Scene
from desktwin.planner.config import PlanContext, RewardWeights
from desktwin.planner.reward import grasp_point, reward
from desktwin.shared.error_handling import PlanningError, ValidationError
from desktwin.sim.simulator import ContactFlag, SimState

GANTRY_BASE = np.array([0.55, 0.0, 0.45])
WEIGHTS = RewardWeights()


@pytest.fixture
def scene() -> Scene:
    return Scene(object=drawer_object(0.4, 0.3, 0.15), robot=cartesian_gantry())


def _transition(s: float, contact: ContactFlag = ContactFlag.NONE):
    before = SimState(q=np.zeros(4), s=0.0)
    after = SimState(q=np.array([0.01, 0.0, 0.0, 0.0]), s=s, contact=contact, t=1)
    return before, np.array([0.01, 0.0, 0.0, 0.0]), after


def _expected_distance(scene: Scene, after: SimState) -> float:
    offset = scene.object.movable_center(after.s) - (GANTRY_BASE + after.q[:3])
    return -10.0 * float(offset @ offset)


def test_no_progress_costs_the_full_target_weight(scene: Scene) -> None:
    before, action, after = _transition(0.0)

    breakdown = reward(before, action, after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene)

    assert breakdown.success == 0.0
    assert breakdown.target == pytest.approx(-50.0)
    assert breakdown.contact == 0.0
    assert breakdown.distance == pytest.approx(_expected_distance(scene, after))
    assert breakdown.regularization == pytest.approx(-(0.01 * 0.01 + 0.03 * 0.01))
    assert breakdown.total == pytest.approx(
        -50.0 + breakdown.distance + breakdown.regularization
    )


def test_partial_progress_earns_contact_bonus(scene: Scene) -> None:
    before, action, after = _transition(0.04)

    breakdown = reward(before, action, after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene)

    assert breakdown.target == pytest.approx(-30.0)
    assert breakdown.contact == pytest.approx(10.0)
    assert breakdown.success == 0.0


def test_success_within_epsilon(scene: Scene) -> None:
    before, action, after = _transition(0.098)

    breakdown = reward(before, action, after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene)

    assert breakdown.success == pytest.approx(20.0)
    assert breakdown.target == pytest.approx(-1.0)
    assert breakdown.contact == pytest.approx(10.0)


def test_success_threshold_is_strict(scene: Scene) -> None:
    weights = RewardWeights(epsilon=0.25)
    before, action, after = _transition(0.75)

    breakdown = reward(before, action, after, PlanContext(0.0, 1.0), weights, scene=scene)

    assert breakdown.success == 0.0
    assert not PlanContext(0.0, 1.0).reached(0.75, 0.25)
    assert PlanContext(0.0, 1.0).reached(0.7501, 0.25)


def test_overshoot_is_clamped_unless_disabled(scene: Scene) -> None:
    before, action, after = _transition(0.15)
    ctx = PlanContext(0.0, 0.1)

    clamped = reward(before, action, after, ctx, WEIGHTS, scene=scene)
    unclamped = reward(
        before, action, after, ctx, RewardWeights(clamp_target=False), scene=scene
    )

    assert clamped.target == 0.0
    assert unclamped.target == pytest.approx(25.0)


def test_unexpected_collision_is_penalized(scene: Scene) -> None:
    before, action, after = _transition(0.04, ContactFlag.UNEXPECTED_COLLISION)

    breakdown = reward(before, action, after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene)

    assert breakdown.contact == pytest.approx(-60.0)


def test_negative_targets_use_signed_progress(scene: Scene) -> None:
    before, action, after = _transition(0.06)

    breakdown = reward(before, action, after, PlanContext(0.1, 0.0), WEIGHTS, scene=scene)

    assert breakdown.target == pytest.approx(-30.0)
    assert breakdown.contact == pytest.approx(10.0)


def test_grasp_point_is_the_fingertip_without_tool(scene: Scene) -> None:
    q = np.array([-0.2, 0.1, -0.3, 0.5])

    assert np.allclose(grasp_point(scene, q), GANTRY_BASE + q[:3])


def test_breakdown_dict_carries_total(scene: Scene) -> None:
    before, action, after = _transition(0.04)

    payload = reward(before, action, after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene).to_dict()

    assert set(payload) == {"success", "target", "contact", "distance", "regularization", "total"}
    assert payload["total"] == pytest.approx(
        sum(value for key, value in payload.items() if key != "total")
    )


def test_weights_validation_and_scaling() -> None:
    with pytest.raises(ValidationError) as negative:
        RewardWeights(target=-1.0)
    assert negative.value.field_path == "reward.target"
    with pytest.raises(ValidationError) as epsilon:
        RewardWeights(epsilon=0.0)
    assert epsilon.value.field_path == "reward.epsilon"

    doubled = WEIGHTS.scaled(2.0)
    assert doubled.target == pytest.approx(100.0)
    assert doubled.collision == pytest.approx(120.0)
    assert doubled.epsilon == WEIGHTS.epsilon
    with pytest.raises(ValidationError):
        WEIGHTS.scaled(0.0)


def test_zero_displacement_task_is_rejected() -> None:
    with pytest.raises(PlanningError):
        PlanContext(0.2, 0.2)
    with pytest.raises(PlanningError):
        PlanContext(0.0, float("nan"))
    assert PlanContext(0.3, 0.1).delta == pytest.approx(-0.2)


def test_constant_velocity_pays_no_acceleration_cost(scene: Scene) -> None:
    before = SimState(q=np.zeros(4), s=0.0, velocity=np.array([0.01, 0.0, 0.0, 0.0]))
    after = SimState(q=np.array([0.01, 0.0, 0.0, 0.0]), s=0.0, t=1)

    breakdown = reward(
        before, np.array([0.01, 0.0, 0.0, 0.0]), after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene
    )

    assert breakdown.regularization == pytest.approx(-0.03 * 0.01, abs=1e-12)


def test_reversal_pays_for_the_velocity_change(scene: Scene) -> None:
    before = SimState(q=np.zeros(4), s=0.0, velocity=np.array([0.0, 0.02, 0.0, 0.0]))
    after = SimState(q=np.array([0.0, -0.01, 0.0, 0.0]), s=0.0, t=1)

    breakdown = reward(
        before, np.array([0.0, -0.01, 0.0, 0.0]), after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene
    )

    assert breakdown.regularization == pytest.approx(-(0.01 * 0.03 + 0.03 * 0.01), abs=1e-12)


def test_idle_robot_far_from_the_part_scores_minus_52_5(scene: Scene) -> None:
    part = scene.object.movable_center(0.0)
    q = np.zeros(4)
    q[:3] = part - GANTRY_BASE + np.array([0.0, 0.0, 0.5])
    before = SimState(q=q, s=0.0)
    after = SimState(q=q, s=0.0, t=1)

    breakdown = reward(before, np.zeros(4), after, PlanContext(0.0, 0.1), WEIGHTS, scene=scene)

    assert breakdown.success == 0.0
    assert breakdown.target == pytest.approx(-50.0)
    assert breakdown.contact == 0.0
    assert breakdown.distance == pytest.approx(-2.5)
    assert breakdown.regularization == 0.0
    assert breakdown.total == pytest.approx(-52.5)
