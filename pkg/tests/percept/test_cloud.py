from __future__ import annotations

import numpy as np
import pytest

from desktwin.percept.cloud import (
    NoiseConfig,
    PointCloud,
    crop_bbox,
    denormalize,
    downsample,
    estimate_normals,
    farthest_point_indices,
    normalize_center,
)
from desktwin.shared.error_handling import PerceptionError, ValidationError


def _grid(count: int = 10) -> np.ndarray:
    axis = np.linspace(0.0, 1.0, count)
    x, y = np.meshgrid(axis, axis)
    return np.column_stack([x.ravel(), y.ravel(), np.zeros(count * count)])


def test_cloud_rejects_empty_and_non_finite_points() -> None:
    with pytest.raises(ValidationError):
        PointCloud(np.zeros((0, 3)))
    with pytest.raises(ValidationError):
        PointCloud(np.array([[0.0, np.nan, 0.0]]))
    with pytest.raises(ValidationError):
        NoiseConfig(dropout=1.0)


def test_crop_keeps_strictly_interior_points_in_order() -> None:
    cloud = PointCloud(np.array([[0.5, 0.5, 0.5], [1.0, 0.5, 0.5], [0.2, 0.9, 0.1], [2.0, 0, 0]]))

    cropped = crop_bbox(cloud, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

    assert np.array_equal(cropped.points, [[0.5, 0.5, 0.5], [0.2, 0.9, 0.1]])
    with pytest.raises(PerceptionError):
        crop_bbox(cloud, (5.0, 5.0, 5.0), (6.0, 6.0, 6.0))


def test_normalize_and_denormalize_are_inverse() -> None:
    cloud = PointCloud(_grid() + [3.0, -1.0, 0.5])

    centered, offset = normalize_center(cloud)

    assert np.allclose(centered.centroid, 0.0)
    assert np.allclose(offset, [3.5, -0.5, 0.5])
    assert np.allclose(denormalize(centered, offset).points, cloud.points)


def test_downsample_returns_exact_count_deterministically() -> None:
    cloud = PointCloud(_grid(20))

    first = downsample(cloud, 50, seed=3)
    second = downsample(cloud, 50, seed=3)

    assert len(first) == 50
    assert np.array_equal(first.points, second.points)
    assert len(np.unique(first.points, axis=0)) == 50


def test_upsampling_keeps_every_original_point() -> None:
    cloud = PointCloud(_grid(3))

    grown = downsample(cloud, 20, seed=1)

    assert len(grown) == 20
    assert np.array_equal(grown.points[:9], cloud.points)
    with pytest.raises(ValidationError):
        downsample(cloud, 0, seed=1)


def test_farthest_point_sampling_spreads_out() -> None:
    points = _grid(20)

    chosen = points[farthest_point_indices(points, 4, seed=0)]

    def spread(sample: np.ndarray) -> float:
        gaps = np.linalg.norm(sample[:, None] - sample[None, :], axis=-1)
        return float(gaps[np.triu_indices(len(sample), 1)].min())

    assert spread(chosen) > 0.4


def test_normals_face_the_viewpoint() -> None:
    points = _grid(8)

    normals = estimate_normals(points, viewpoint=(0.5, 0.5, -2.0), k=8)

    assert np.allclose(normals, [0.0, 0.0, -1.0], atol=1e-6)
