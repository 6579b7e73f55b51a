from __future__ import annotations

import numpy as np
import pytest

from desktwin.percept.cloud import PointCloud
from desktwin.shared.error_handling import InsufficientMotionError, ValidationError
from desktwin.twin.segmentation import default_tau, segment_moving

BASE_COUNT = 800
PANEL_COUNT = 400


def _solid(rng: np.random.Generator, lower, upper, count: int) -> np.ndarray:
    return rng.uniform(lower, upper, size=(count, 3))


def _pair(offset: float) -> tuple[PointCloud, PointCloud]:
    rng = np.random.default_rng(3)
    base = _solid(rng, (-0.2, -0.2, 0.0), (0.2, 0.2, 0.1), BASE_COUNT)
    panel = _solid(rng, (0.25, -0.1, 0.0), (0.27, 0.1, 0.1), PANEL_COUNT)
    moved = panel + np.array([offset, 0.0, 0.0])
    return PointCloud(np.vstack([base, panel])), PointCloud(np.vstack([base, moved]))


def test_default_tau_follows_depth_noise() -> None:
    assert default_tau(0.0) == pytest.approx(0.005)
    assert default_tau(0.002) == pytest.approx(0.005)
    assert default_tau(0.004) == pytest.approx(0.008)


def test_moved_panel_is_separated_from_static_base() -> None:
    cloud0, cloud1 = _pair(0.05)

    mask = segment_moving(cloud0, cloud1, 0.005)

    assert mask.moved0[BASE_COUNT:].mean() > 0.95
    assert mask.moved1[BASE_COUNT:].mean() > 0.95
    assert mask.moved0[:BASE_COUNT].mean() < 0.02
    assert mask.moved1[:BASE_COUNT].mean() < 0.02
    assert mask.moved_counts == (int(mask.moved0.sum()), int(mask.moved1.sum()))


def test_cleanup_can_be_disabled() -> None:
    cloud0, cloud1 = _pair(0.05)

    mask = segment_moving(cloud0, cloud1, 0.005, cleanup_k=0)

    assert mask.moved0[BASE_COUNT:].all()
    assert not mask.moved0[:BASE_COUNT].any()


def test_identical_clouds_raise_insufficient_motion() -> None:
    cloud0, _ = _pair(0.0)

    with pytest.raises(InsufficientMotionError) as excinfo:
        segment_moving(cloud0, cloud0, 0.005)

    assert excinfo.value.context["moved0"] == 0
    assert excinfo.value.context["moved1"] == 0


def test_motion_below_tau_is_not_motion() -> None:
    cloud0, cloud1 = _pair(0.003)

    with pytest.raises(InsufficientMotionError):
        segment_moving(cloud0, cloud1, 0.005)


def test_invalid_inputs_are_rejected() -> None:
    cloud0, cloud1 = _pair(0.05)

    with pytest.raises(ValidationError) as negative:
        segment_moving(cloud0, cloud1, -0.001)
    assert negative.value.field_path == "twin.tau"

    other_frame = PointCloud(cloud1.points, frame="camera")
    with pytest.raises(ValidationError) as frames:
        segment_moving(cloud0, other_frame, 0.005)
    assert frames.value.field_path == "cloud.frame"

    small = cloud0.subset(np.arange(50))
    with pytest.raises(ValidationError) as tiny:
        segment_moving(small, cloud1, 0.005)
    assert tiny.value.field_path == "twin.cloud0"
