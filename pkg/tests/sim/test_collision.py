from __future__ import annotations

import numpy as np
import pytest

from desktwin.model.geometry import RigidGeometry, RigidTransform
from desktwin.sim.collision import (
    gjk_closest_point,
    link_proximity,
    part_proximity,
    point_distance,
    table_proximity,
)


def test_box_distance_outside_and_inside() -> None:
    box = RigidGeometry.box((0.1, 0.1, 0.1))
    spheres = np.array([[0.2, 0.0, 0.0, 0.05], [0.05, 0.0, 0.0, 0.01]])

    result = part_proximity(box, RigidTransform.identity(), spheres)

    assert result.distance[0] == pytest.approx(0.05)
    assert np.allclose(result.witness[0], [0.1, 0.0, 0.0])
    assert np.allclose(result.normal[0], [1.0, 0.0, 0.0])
    assert result.distance[1] == pytest.approx(-0.06)
    assert np.allclose(result.normal[1], [1.0, 0.0, 0.0])


def test_link_pose_moves_the_primitive() -> None:
    box = RigidGeometry.box((0.1, 0.1, 0.1))
    turn = RigidTransform.from_axis_angle((0.0, 0.0, 1.0), np.pi / 2)
    pose = turn @ RigidTransform.from_translation((1.0, 0.0, 0.0))

    result = part_proximity(box, pose, np.array([[0.0, 1.15, 0.0, 0.0]]))

    assert result.distance[0] == pytest.approx(0.05)
    assert np.allclose(result.normal[0], [0.0, 1.0, 0.0])


def test_hull_distance_matches_gjk_near_an_edge() -> None:
    cube = RigidGeometry.hull(
        np.array([[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)])
    )
    point = np.array([1.02, 1.02, 0.5])

    result = point_distance([cube], RigidTransform.identity(), point[None, :])

    assert result.distance[0] == pytest.approx(np.hypot(0.02, 0.02))
    assert np.allclose(result.witness[0], [1.0, 1.0, 0.5])


def test_gjk_returns_point_inside_hull_unchanged() -> None:
    vertices = RigidGeometry.cylinder_hull(0.05, 0.1).vertices
    point = np.array([0.0, 0.0, 0.05])

    assert np.allclose(gjk_closest_point(vertices, point), point)


def test_sphere_primitive_distance() -> None:
    sphere = RigidGeometry.sphere(0.1, center=(0.0, 0.0, 1.0))

    result = part_proximity(sphere, RigidTransform.identity(), np.array([[0.0, 0.0, 1.5, 0.1]]))

    assert result.distance[0] == pytest.approx(0.3)
    assert np.allclose(result.witness[0], [0.0, 0.0, 1.1])


def test_compound_link_reports_closest_part() -> None:
    parts = [
        RigidGeometry.box((0.1, 0.1, 0.1), center=(0.0, 0.0, 0.0)),
        RigidGeometry.box((0.1, 0.1, 0.1), center=(1.0, 0.0, 0.0)),
    ]

    result = link_proximity(parts, RigidTransform.identity(), np.array([[0.8, 0.0, 0.0, 0.0]]))

    assert result.distance[0] == pytest.approx(0.1)
    assert result.witness[0][0] == pytest.approx(0.9)


def test_far_spheres_get_a_lower_bound() -> None:
    box = RigidGeometry.box((0.1, 0.1, 0.1))

    result = part_proximity(box, RigidTransform.identity(), np.array([[5.0, 0.0, 0.0, 0.0]]))

    assert 4.8 < result.distance[0] <= 4.9 + 1e-12


def test_table_is_a_half_space() -> None:
    spheres = np.array([[0.3, 0.1, 0.05, 0.01], [0.0, 0.0, -0.02, 0.01]])

    result = table_proximity(0.0, spheres)

    assert np.allclose(result.distance, [0.04, -0.03])
    assert np.allclose(result.witness[:, 2], 0.0)
