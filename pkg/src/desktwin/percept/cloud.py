"""Point clouds with provenance, plus cropping, centering and downsampling."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..shared.error_handling import PerceptionError, ValidationError
from .camera import CameraPose

logger = logging.getLogger(__name__)

AFFORDANCE_POINTS = 2000
TWIN_POINTS = 8192


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian depth noise along the ray plus independent pixel dropout."""

    depth_sigma: float = 0.002
    dropout: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if self.depth_sigma < 0.0:
            raise ValidationError("depth_sigma must be >= 0", field_path="noise.depth_sigma")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must lie in [0, 1)", field_path="noise.dropout")

    @classmethod
    def noiseless(cls, seed: int = 0) -> "NoiseConfig":
        return cls(depth_sigma=0.0, dropout=0.0, seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        return {"depth_sigma": self.depth_sigma, "dropout": self.dropout, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class Provenance:
    camera: CameraPose | None = None
    noise: NoiseConfig | None = None
    scene_id: str | None = None
    joint_state: float | None = None

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {}
        if self.camera is not None:
            payload["camera"] = self.camera.to_dict()
        if self.noise is not None:
            payload["noise"] = self.noise.to_dict()
        if self.scene_id is not None:
            payload["scene_id"] = self.scene_id
        if self.joint_state is not None:
            payload["joint_state"] = self.joint_state
        return payload

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "Provenance":
        camera = payload.get("camera")
        noise = payload.get("noise")
        return cls(
            camera=CameraPose.from_dict(camera) if camera else None,
            noise=NoiseConfig(**noise) if noise else None,
            scene_id=payload.get("scene_id"),
            joint_state=payload.get("joint_state"),
        )


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered points ``(n, 3)`` in the frame named by ``frame``."""

    points: np.ndarray
    frame: str = "world"
    provenance: Provenance | None = None
    comments: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValidationError("points must be an (n, 3) array", field_path="cloud.points")
        if len(points) == 0:
            raise ValidationError("point cloud is empty", field_path="cloud.points")
        if not np.all(np.isfinite(points)):
            raise ValidationError(
                "point cloud has non-finite coordinates", field_path="cloud.points"
            )
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "comments", tuple(self.comments))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def with_points(self, points: np.ndarray) -> "PointCloud":
        return replace(self, points=points)

    def translate(self, offset: Sequence[float]) -> "PointCloud":
        return self.with_points(self.points + np.asarray(offset, dtype=float))

    def subset(self, mask_or_indices: np.ndarray) -> "PointCloud":
        return self.with_points(self.points[mask_or_indices])


def crop_bbox(cloud: PointCloud, lower: Sequence[float], upper: Sequence[float]) -> PointCloud:
    """Points strictly inside the axis-aligned box, order preserved."""

    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    inside = np.all((cloud.points > lo) & (cloud.points < hi), axis=1)
    if not np.any(inside):
        raise PerceptionError(
            "crop box contains no points",
            context={"lower": lo.tolist(), "upper": hi.tolist(), "points": len(cloud)},
        )
    return cloud.subset(inside)


def normalize_center(cloud: PointCloud) -> tuple[PointCloud, np.ndarray]:
    """Move the centroid to the origin; returns the subtracted offset."""

    offset = cloud.centroid
    return cloud.with_points(cloud.points - offset), offset


def denormalize(cloud: PointCloud, offset: Sequence[float]) -> PointCloud:
    return cloud.translate(offset)


def farthest_point_indices(points: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Greedy farthest-point sampling from a seeded random start."""

    count = len(points)
    rng = np.random.default_rng(seed)
    chosen = np.empty(n, dtype=np.int64)
    chosen[0] = int(rng.integers(count))
    nearest = np.einsum("ij,ij->i", points - points[chosen[0]], points - points[chosen[0]])
    for index in range(1, n):
        chosen[index] = int(np.argmax(nearest))
        offset = points - points[chosen[index]]
        np.minimum(nearest, np.einsum("ij,ij->i", offset, offset), out=nearest)
    return chosen


def downsample(cloud: PointCloud, n: int, seed: int) -> PointCloud:
    """Resize ``cloud`` to exactly ``n`` points.

    Larger clouds are reduced by farthest-point sampling. Smaller ones keep
    every point once and are filled up with seeded draws with replacement.
    """

    if n <= 0:
        raise ValidationError("target point count must be positive", field_path="downsample.n")
    size = len(cloud)
    if size > n:
        return cloud.subset(farthest_point_indices(cloud.points, n, seed))
    if size == n:
        return cloud
    rng = np.random.default_rng(seed)
    extra = rng.integers(size, size=n - size)
    logger.debug("Upsampling %d points to %d with replacement", size, n)
    return cloud.subset(np.concatenate([np.arange(size), extra]))


def estimate_normals(points: np.ndarray, viewpoint: Sequence[float], k: int = 16) -> np.ndarray:
    """Unit normals from PCA over ``k`` neighbours, oriented toward ``viewpoint``."""

    points = np.asarray(points, dtype=float)
    k = max(3, min(k, len(points)))
    _, neighbours = cKDTree(points).query(points, k=k)
    patches = points[neighbours]
    centered = patches - patches.mean(axis=1, keepdims=True)
    covariance = np.einsum("nki,nkj->nij", centered, centered)
    _, vectors = np.linalg.eigh(covariance)
    normals = vectors[:, :, 0]
    toward = np.asarray(viewpoint, dtype=float) - points
    flip = np.einsum("ij,ij->i", normals, toward) < 0.0
    normals[flip] *= -1.0
    return normals
