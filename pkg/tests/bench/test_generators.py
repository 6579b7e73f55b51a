from __future__ import annotations

import math

import numpy as np
import pytest

from desktwin.bench.generators import (
    STATE_MARGIN,
    Category,
    axis_jitter,
    drawer_scene,
    generate_scene,
    tool_reach_drawer_scene,
)
from desktwin.model.articulation import JointKind
from desktwin.shared.error_handling import ValidationError

GANTRY_X_MIN = 0.55 - 0.9


@pytest.mark.parametrize("category", list(Category))
def test_scenes_are_determined_by_seed(category: Category) -> None:
    first = generate_scene(category, 7)
    second = generate_scene(category.value, 7)
    other = generate_scene(category, 8)

    assert first.to_dict() == second.to_dict()
    assert first.to_dict() != other.to_dict()
    assert first.category == category.value


@pytest.mark.parametrize("category", list(Category))
def test_start_state_avoids_the_joint_limits(category: Category) -> None:
    for seed in range(10):
        joint = generate_scene(category, seed).object.joint
        margin = STATE_MARGIN * (joint.upper - joint.lower)

        assert joint.lower + margin <= joint.state <= joint.upper - margin


@pytest.mark.parametrize("category", list(Category))
def test_objects_stand_on_the_table(category: Category) -> None:
    scene = generate_scene(category, 3)

    lower, _ = scene.object.world_bounds()

    assert lower[2] == pytest.approx(0.0, abs=1e-9)


def test_joint_kinds_per_category() -> None:
    assert generate_scene("drawer", 0).object.joint.kind is JointKind.PRISMATIC
    assert generate_scene("laptop", 0).object.joint.kind is JointKind.REVOLUTE
    assert generate_scene("faucet", 0).object.joint.kind is JointKind.REVOLUTE


def test_unknown_category_is_rejected() -> None:
    with pytest.raises(ValidationError) as excinfo:
        generate_scene("fridge", 0)

    assert excinfo.value.field_path == "bench.category"


def test_zero_jitter_returns_the_scene_itself() -> None:
    scene = drawer_scene(2)

    assert axis_jitter(scene, 0.0, seed=2) is scene


def test_jitter_tilts_the_axis_by_the_requested_angle() -> None:
    scene = drawer_scene(2)

    jittered = axis_jitter(scene, 5.0, seed=2)

    cosine = float(jittered.object.joint.axis @ scene.object.joint.axis)
    assert math.degrees(math.acos(min(1.0, cosine))) == pytest.approx(5.0)
    assert np.linalg.norm(jittered.object.joint.axis) == pytest.approx(1.0)
    assert np.array_equal(
        axis_jitter(scene, 5.0, seed=2).object.joint.axis, jittered.object.joint.axis
    )


def test_tool_reach_drawer_faces_away_beyond_the_fingertip() -> None:
    scene = tool_reach_drawer_scene(0)
    obj = scene.object

    axis, _ = obj.world_axis()
    lower, _ = obj.world_bounds()

    assert np.allclose(axis, [-1.0, 0.0, 0.0], atol=1e-9)
    assert lower[0] < GANTRY_X_MIN - scene.robot.fingertip_radius
    assert obj.movable_center(obj.state)[0] < GANTRY_X_MIN
    assert tool_reach_drawer_scene(0).to_dict() == scene.to_dict()
