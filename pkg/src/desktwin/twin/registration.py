"""Trimmed point-to-point ICP between the moved segments of two observations."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..model.geometry import RigidTransform
from ..percept.cloud import PointCloud
from ..shared.error_handling import RegistrationError, ValidationError

logger = logging.getLogger(__name__)

ICP_MAX_ITERATIONS = 100
ICP_TOLERANCE = 1e-6
TRIM_FRACTION = 0.8
MIN_SEGMENT_POINTS = 20


@dataclass(frozen=True)
class RegistrationResult:
    transform: RigidTransform
    residual: float
    iterations: int
    converged: bool
    start: str


def best_fit_transform(source: np.ndarray, target: np.ndarray) -> RigidTransform:
    """Least-squares rigid transform mapping corresponding ``source`` points onto ``target``."""

    centroid_source = source.mean(axis=0)
    centroid_target = target.mean(axis=0)
    H = (source - centroid_source).T @ (target - centroid_target)
    U, _, Vt = np.linalg.svd(H)
    R = Vt.T @ U.T
    # special reflection case
    if np.linalg.det(R) < 0.0:
        Vt[2, :] *= -1.0
        R = Vt.T @ U.T
    return RigidTransform._trusted(R, centroid_target - R @ centroid_source)


def trimmed_icp(
    source: np.ndarray,
    target: np.ndarray,
    init: RigidTransform,
    *,
    max_iterations: int = ICP_MAX_ITERATIONS,
    tolerance: float = ICP_TOLERANCE,
    trim: float = TRIM_FRACTION,
    start: str = "identity",
) -> RegistrationResult:
    """ICP keeping the best ``trim`` fraction of correspondences each iteration."""

    tree = cKDTree(target)
    keep = max(3, int(math.ceil(trim * len(source))))
    transform = init
    previous = math.inf
    error = math.inf
    for iteration in range(1, max_iterations + 1):
        moved = transform.apply(source)
        distances, indices = tree.query(moved)
        order = np.argsort(distances, kind="stable")[:keep]
        error = float(distances[order].mean())
        if previous - error < tolerance:
            return RegistrationResult(transform, error, iteration, True, start)
        previous = error
        step = best_fit_transform(moved[order], target[indices[order]])
        transform = step @ transform
    return RegistrationResult(transform, error, max_iterations, False, start)


def register_segments(
    moved0: PointCloud,
    moved1: PointCloud,
    *,
    max_iterations: int = ICP_MAX_ITERATIONS,
    tolerance: float = ICP_TOLERANCE,
    trim: float = TRIM_FRACTION,
) -> RegistrationResult:
    """Rigid transform mapping ``moved0`` into ``moved1``.

    Registration starts from identity and again from the centroid offset;
    the converged run with the lower trimmed residual wins.

    Raises:
        RegistrationError: Neither start converged within ``max_iterations``.
    """

    for name, cloud in (("moved0", moved0), ("moved1", moved1)):
        if len(cloud) < MIN_SEGMENT_POINTS:
            raise ValidationError(
                f"{name} has {len(cloud)} points, need at least {MIN_SEGMENT_POINTS}",
                field_path=f"twin.{name}",
            )
    if not 0.0 < trim <= 1.0:
        raise ValidationError("trim must lie in (0, 1]", field_path="twin.trim", invalid_value=trim)

    source, target = moved0.points, moved1.points
    starts = [
        ("identity", RigidTransform.identity()),
        ("centroid", RigidTransform._trusted(np.eye(3), target.mean(axis=0) - source.mean(axis=0))),
    ]
    results = [
        trimmed_icp(
            source, target, init,
            max_iterations=max_iterations, tolerance=tolerance, trim=trim, start=label,
        )
        for label, init in starts
    ]
    converged = [result for result in results if result.converged]
    if not converged:
        best = min(results, key=lambda result: result.residual)
        raise RegistrationError(
            f"ICP did not converge within {max_iterations} iterations",
            final_residual=best.residual,
        )
    # min() keeps the first of equal residuals, so identity wins ties.
    best = min(converged, key=lambda result: result.residual)
    logger.debug(
        "ICP from %s start: residual %.6f after %d iterations",
        best.start,
        best.residual,
        best.iterations,
    )
    return best
