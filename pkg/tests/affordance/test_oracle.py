from __future__ import annotations

import math

import numpy as np
import pytest

from desktwin.affordance.oracle import (
    ActionProposal,
    AffordanceConfig,
    Primitive,
    ScoredPoint,
    point_seed,
    propose_actions,
    push_once,
    pusher_scene,
    sample_directions,
    score_points,
    snap_to_surface,
    top_points,
)
from desktwin.bench.generators import drawer_object
from desktwin.model.chain import cartesian_gantry
from desktwin.model.scene import Scene
from desktwin.percept.cloud import PointCloud
from desktwin.shared.error_handling import ValidationError

# Drawer of depth 0.3 opened to 0.1: the panel front face sits at x = 0.268.
PANEL_POINT = np.array([0.268, 0.0, 0.1])
SHELL_TOP_POINT = np.array([0.0, 0.0, 0.15])


def _drawer_world() -> Scene:
    return Scene(object=drawer_object(0.4, 0.3, 0.15, state=0.1), robot=cartesian_gantry())


def test_push_directions_stay_inside_the_cone() -> None:
    config = AffordanceConfig()
    normal = np.array([0.0, 0.0, 1.0])

    directions = sample_directions(normal, Primitive.PUSH, 64, seed=3, config=config)

    assert np.allclose(np.linalg.norm(directions, axis=1), 1.0)
    cosines = directions @ -normal
    assert np.all(cosines >= math.cos(math.radians(config.cone_deg)) - 1e-12)


def test_push_left_directions_tilt_to_the_left() -> None:
    config = AffordanceConfig()
    normal = np.array([1.0, 0.0, 0.0])

    directions = sample_directions(normal, Primitive.PUSH_LEFT, 32, seed=0, config=config)

    tilt = np.degrees(np.arccos(np.clip(directions @ -normal, -1.0, 1.0)))
    assert np.all((tilt >= 30.0 - 1e-9) & (tilt <= 75.0 + 1e-9))
    # Facing -x with z up, left is -y.
    assert np.all(directions[:, 1] < 0.0)


def test_longer_direction_draws_extend_shorter_ones() -> None:
    config = AffordanceConfig()
    normal = np.array([0.0, 1.0, 0.0])

    short = sample_directions(normal, Primitive.PUSH, 4, seed=11, config=config)
    long = sample_directions(normal, Primitive.PUSH, 16, seed=11, config=config)

    assert np.allclose(long[:4], short)


def test_snap_to_surface_picks_the_nearest_link() -> None:
    world = _drawer_world()
    noisy = np.array([PANEL_POINT + [0.003, 0.0, 0.0], SHELL_TOP_POINT + [0.0, 0.0, 0.002]])

    points, normals = snap_to_surface(world, noisy)

    assert np.allclose(points, [PANEL_POINT, SHELL_TOP_POINT], atol=1e-9)
    assert np.allclose(normals, [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def test_pushing_the_panel_moves_the_drawer_by_the_stroke() -> None:
    pusher = pusher_scene(_drawer_world())
    config = AffordanceConfig()
    normal = np.array([1.0, 0.0, 0.0])

    moved = push_once(pusher, PANEL_POINT, normal, -normal, config)

    assert moved == pytest.approx(config.stroke, abs=1e-3)


def test_pushing_the_base_scores_zero() -> None:
    pusher = pusher_scene(_drawer_world())
    normal = np.array([0.0, 0.0, 1.0])

    assert push_once(pusher, SHELL_TOP_POINT, normal, -normal, AffordanceConfig()) == 0.0


def test_score_points_ranks_movable_surface_first() -> None:
    world = _drawer_world()
    cloud = PointCloud(np.vstack([SHELL_TOP_POINT, PANEL_POINT]))
    config = AffordanceConfig(n_dirs=4)

    scored = score_points(cloud, world, Primitive.PUSH, seed=2, config=config)
    again = score_points(cloud, world, Primitive.PUSH, seed=2, config=config)

    assert [item.index for item in scored] == [0, 1]
    assert scored[0].actionability == 0.0
    assert scored[1].actionability > 0.01
    assert [item.actionability for item in scored] == [item.actionability for item in again]
    assert scored[1].seed == point_seed(2, 1)
    assert [item.index for item in top_points(scored, 5)] == [1]


def test_top_points_breaks_ties_by_point_order() -> None:
    def scored(index: int, value: float) -> ScoredPoint:
        return ScoredPoint(np.zeros(3), np.array([0.0, 0.0, 1.0]), value, 0, index)

    ranked = top_points([scored(0, 0.1), scored(1, 0.3), scored(2, 0.1), scored(3, 0.0)], 2)

    assert [item.index for item in ranked] == [1, 0]


def test_propose_actions_sorted_by_success() -> None:
    world = _drawer_world()
    normal = np.array([1.0, 0.0, 0.0])
    point = ScoredPoint(PANEL_POINT, normal, 0.05, point_seed(0, 0), 0)

    proposals = propose_actions(point, Primitive.PUSH, 3, world=world, n_candidates=6)

    assert len(proposals) == 3
    successes = [item.success for item in proposals]
    assert successes == sorted(successes, reverse=True)
    assert successes[0] > 0.0
    assert all(np.allclose(item.approach, -normal) for item in proposals)
    assert all(item.push @ -normal >= math.cos(math.radians(45.0)) - 1e-9 for item in proposals)


def test_proposal_validates_unit_vectors() -> None:
    with pytest.raises(ValidationError):
        ActionProposal(
            point=np.zeros(3),
            approach=np.array([0.0, 0.0, -2.0]),
            push=np.array([1.0, 0.0, 0.0]),
            actionability=0.1,
            success=0.1,
        )


def test_config_rejects_bad_cone() -> None:
    with pytest.raises(ValidationError):
        AffordanceConfig(cone_deg=90.0)
