from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from desktwin.bench.generators import drawer_scene
from desktwin.model.geometry import RigidTransform
from desktwin.percept.camera import (
    CameraIntrinsics,
    CameraPose,
    object_heading,
    sample_camera,
    scene_camera,
)
from desktwin.shared.error_handling import ValidationError


def test_camera_sits_on_sphere_and_looks_at_target() -> None:
    look_at = np.array([0.1, -0.2, 0.05])
    camera = CameraPose(azimuth=30.0, altitude=40.0, radius=1.2, look_at=look_at)

    assert np.linalg.norm(camera.position - look_at) == pytest.approx(1.2)
    assert camera.position[2] - look_at[2] == pytest.approx(1.2 * math.sin(math.radians(40.0)))
    toward = (look_at - camera.position) / 1.2
    assert np.allclose(camera.forward, toward)


def test_camera_rotation_is_proper_with_image_y_pointing_down() -> None:
    camera = CameraPose(azimuth=-20.0, altitude=30.0, radius=1.0)
    rotation = camera.rotation

    assert np.allclose(rotation.T @ rotation, np.eye(3))
    assert np.linalg.det(rotation) == pytest.approx(1.0)
    assert rotation[2, 1] < 0.0


def test_ray_directions_cover_the_image_row_major() -> None:
    camera = CameraPose(
        azimuth=0.0, altitude=45.0, radius=1.0, intrinsics=CameraIntrinsics(8, 6, 60.0)
    )

    rays = camera.ray_directions()

    assert rays.shape == (48, 3)
    assert np.allclose(np.linalg.norm(rays, axis=1), 1.0)
    assert rays[0] @ camera.rotation[:, 1] < 0.0
    assert rays[-1] @ camera.rotation[:, 1] > 0.0
    assert np.allclose(rays.mean(axis=0) / np.linalg.norm(rays.mean(axis=0)), camera.forward)


def test_altitude_must_stay_above_the_table() -> None:
    with pytest.raises(ValidationError):
        CameraPose(azimuth=0.0, altitude=0.0, radius=1.0)


def test_sample_camera_is_seeded_and_within_ranges() -> None:
    first = sample_camera((-60.0, 60.0), (15.0, 45.0), 1.2, (0.0, 0.0, 0.0), seed=5)
    second = sample_camera((-60.0, 60.0), (15.0, 45.0), 1.2, (0.0, 0.0, 0.0), seed=5)
    fixed = sample_camera((10.0, 10.0), (20.0, 20.0), 1.0, (0.0, 0.0, 0.0), seed=5)

    assert first.azimuth == second.azimuth and first.altitude == second.altitude
    assert -60.0 <= first.azimuth <= 60.0
    assert 15.0 <= first.altitude <= 45.0
    assert (fixed.azimuth, fixed.altitude) == (10.0, 20.0)
    with pytest.raises(ValidationError):
        sample_camera((10.0, -10.0), (20.0, 30.0), 1.0, (0.0, 0.0, 0.0), seed=0)


def test_camera_record_round_trip() -> None:
    camera = CameraPose(azimuth=12.0, altitude=33.0, radius=0.9, reference_yaw=45.0)

    restored = CameraPose.from_dict(camera.to_dict())

    assert np.allclose(restored.position, camera.position)
    with pytest.raises(ValidationError):
        CameraPose.from_dict({"azimuth": 1.0})


def test_scene_camera_faces_the_object_front() -> None:
    scene = drawer_scene(3)
    yawed = scene.with_object(
        replace(scene.object, pose=RigidTransform.from_rpy((0.0, 0.0, math.pi / 2)))
    )

    camera = scene_camera(yawed, seed=0)

    assert object_heading(yawed) == pytest.approx(90.0)
    assert camera.reference_yaw == pytest.approx(90.0)
    assert camera.radius == pytest.approx(scene.sensing.radius)
