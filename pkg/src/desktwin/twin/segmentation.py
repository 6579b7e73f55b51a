"""Moved/static segmentation of two observations of the same object."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..percept.cloud import PointCloud
from ..shared.error_handling import InsufficientMotionError, ValidationError

logger = logging.getLogger(__name__)

MIN_CLOUD_POINTS = 100
MIN_MOVED_POINTS = 20
MIN_TAU = 0.005
CLEANUP_NEIGHBOURS = 8


def default_tau(depth_sigma: float) -> float:
    """Segmentation threshold tied to the sensor noise level."""

    return max(MIN_TAU, 2.0 * depth_sigma)


@dataclass(frozen=True, eq=False)
class SegmentationMask:
    moved0: np.ndarray
    moved1: np.ndarray

    def __post_init__(self) -> None:
        for name in ("moved0", "moved1"):
            mask = np.array(getattr(self, name), dtype=bool)
            if mask.ndim != 1:
                raise ValidationError("mask must be one-dimensional", field_path=f"mask.{name}")
            mask.setflags(write=False)
            object.__setattr__(self, name, mask)

    @property
    def moved_counts(self) -> tuple[int, int]:
        return int(self.moved0.sum()), int(self.moved1.sum())


def _majority_filter(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    # Each point takes the majority label of itself and its k neighbours.
    count = min(k + 1, len(points))
    _, neighbours = cKDTree(points).query(points, k=count)
    votes = labels[neighbours].sum(axis=1)
    return votes * 2 > count


def segment_moving(
    cloud0: PointCloud,
    cloud1: PointCloud,
    tau: float,
    *,
    cleanup_k: int = CLEANUP_NEIGHBOURS,
    min_moved: int = MIN_MOVED_POINTS,
) -> SegmentationMask:
    """Label points whose nearest neighbour in the other cloud is farther than ``tau``.

    Raises:
        InsufficientMotionError: Fewer than ``min_moved`` points moved in either cloud.
    """

    if tau < 0.0:
        raise ValidationError("tau must be >= 0", field_path="twin.tau", invalid_value=tau)
    if cloud0.frame != cloud1.frame:
        raise ValidationError(
            f"clouds are in different frames ({cloud0.frame!r}, {cloud1.frame!r})",
            field_path="cloud.frame",
        )
    for name, cloud in (("cloud0", cloud0), ("cloud1", cloud1)):
        if len(cloud) < MIN_CLOUD_POINTS:
            raise ValidationError(
                f"{name} has {len(cloud)} points, need at least {MIN_CLOUD_POINTS}",
                field_path=f"twin.{name}",
            )

    distance1, _ = cKDTree(cloud0.points).query(cloud1.points)
    distance0, _ = cKDTree(cloud1.points).query(cloud0.points)
    moved0 = distance0 > tau
    moved1 = distance1 > tau
    if cleanup_k > 0:
        moved0 = _majority_filter(cloud0.points, moved0, cleanup_k)
        moved1 = _majority_filter(cloud1.points, moved1, cleanup_k)

    mask = SegmentationMask(moved0, moved1)
    count0, count1 = mask.moved_counts
    logger.debug("Segmentation at tau=%.4f: %d / %d moved points", tau, count0, count1)
    if min(count0, count1) < min_moved:
        raise InsufficientMotionError(
            f"insufficient motion: {count0} and {count1} moved points (need {min_moved})",
            moved0=count0,
            moved1=count1,
        )
    return mask
