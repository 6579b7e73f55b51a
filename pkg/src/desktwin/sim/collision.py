"""Signed distances between robot spheres and scene primitives.

Every robot-side collider is a sphere, so each query reduces to the signed
distance from a point to a primitive minus the sphere radius. Boxes and
spheres have closed forms. Hulls (and meshes, which collide as their hull)
use the facet planes for the inside case and GJK on the support mapping for
points close to the outside.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model.geometry import GeometryKind, RigidGeometry, RigidTransform

# Beyond this plane bound a hull distance is reported as the bound itself.
EXACT_MARGIN = 0.05
GJK_MAX_ITERATIONS = 64
_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Proximity:
    """Per-sphere query result, all in the world frame.

    Attributes:
        distance: Signed gap ``(k,)`` between sphere surface and shape surface;
            negative values are penetration depths.
        witness: Closest point ``(k, 3)`` on the shape surface.
        normal: Outward shape normal ``(k, 3)`` at the witness, pointing toward
            the sphere center.
    """

    distance: np.ndarray
    witness: np.ndarray
    normal: np.ndarray

    @classmethod
    def empty(cls, count: int) -> "Proximity":
        normal = np.zeros((count, 3))
        normal[:, 2] = 1.0
        return cls(np.full(count, np.inf), np.zeros((count, 3)), normal)

    def minimum(self, other: "Proximity") -> "Proximity":
        closer = other.distance < self.distance
        return Proximity(
            np.where(closer, other.distance, self.distance),
            np.where(closer[:, None], other.witness, self.witness),
            np.where(closer[:, None], other.normal, self.normal),
        )


# ============================================================================
# GJK for point-versus-polytope distance
# ============================================================================

def _closest_on_segment(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    ab = b - a
    denom = float(ab @ ab)
    if denom < _EPS:
        return a, [a]
    t = -float(a @ ab) / denom
    if t <= 0.0:
        return a, [a]
    if t >= 1.0:
        return b, [b]
    return a + t * ab, [a, b]


def _closest_on_triangle(
    a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Closest point to the origin on triangle ``abc`` with its supporting subset."""

    ab = b - a
    ac = c - a
    d1 = -float(ab @ a)
    d2 = -float(ac @ a)
    if d1 <= 0.0 and d2 <= 0.0:
        return a, [a]
    d3 = -float(ab @ b)
    d4 = -float(ac @ b)
    if d3 >= 0.0 and d4 <= d3:
        return b, [b]
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return a + v * ab, [a, b]
    d5 = -float(ab @ c)
    d6 = -float(ac @ c)
    if d6 >= 0.0 and d5 <= d6:
        return c, [c]
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return a + w * ac, [a, c]
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return b + w * (c - b), [b, c]
    total = va + vb + vc
    if abs(total) < _EPS:
        # Collinear vertices: fall back to the best edge.
        candidates = [
            _closest_on_segment(a, b), _closest_on_segment(b, c), _closest_on_segment(a, c)
        ]
        return min(candidates, key=lambda item: float(item[0] @ item[0]))
    v = vb / total
    w = vc / total
    return a + ab * v + ac * w, [a, b, c]


def _closest_on_tetrahedron(simplex: Sequence[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    a, b, c, d = simplex
    best: tuple[np.ndarray, list[np.ndarray]] | None = None
    best_sq = np.inf
    inside = True
    for p, q, r, opposite in ((a, b, c, d), (a, c, d, b), (a, d, b, c), (b, d, c, a)):
        normal = np.cross(q - p, r - p)
        side_origin = -float(normal @ p)
        side_opposite = float(normal @ (opposite - p))
        if abs(side_opposite) > _EPS and side_origin * side_opposite > 0.0:
            continue
        inside = False
        point, subset = _closest_on_triangle(p, q, r)
        distance_sq = float(point @ point)
        if distance_sq < best_sq:
            best_sq = distance_sq
            best = (point, subset)
    if inside or best is None:
        return np.zeros(3), list(simplex)
    return best


def _closest_on_simplex(simplex: list[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    if len(simplex) == 1:
        return simplex[0], simplex
    if len(simplex) == 2:
        return _closest_on_segment(*simplex)
    if len(simplex) == 3:
        return _closest_on_triangle(*simplex)
    return _closest_on_tetrahedron(simplex)


def gjk_closest_point(vertices: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Closest point of ``conv(vertices)`` to ``point``.

    Returns ``point`` itself when it lies inside the hull.
    """

    shifted = vertices - point
    v = shifted[int(np.argmin(np.einsum("ij,ij->i", shifted, shifted)))]
    simplex = [v]
    for _ in range(GJK_MAX_ITERATIONS):
        vv = float(v @ v)
        if vv < 1e-24:
            return point.copy()
        w = shifted[int(np.argmin(shifted @ v))]
        if vv - float(v @ w) <= 1e-12 * vv + 1e-18:
            break
        if any(np.array_equal(w, existing) for existing in simplex):
            break
        simplex.append(w)
        v, simplex = _closest_on_simplex(simplex)
    return point + v


# ============================================================================
# Point-to-primitive queries in the primitive frame
# ============================================================================

def _box_query(
    points: np.ndarray, center: np.ndarray, half: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    local = points - center
    excess = np.abs(local) - half
    outside = np.maximum(excess, 0.0)
    outside_norm = np.linalg.norm(outside, axis=1)
    is_outside = outside_norm > 0.0

    clamped = np.clip(local, -half, half)
    with np.errstate(invalid="ignore", divide="ignore"):
        out_normal = (local - clamped) / np.where(is_outside, outside_norm, 1.0)[:, None]

    face = np.argmax(excess, axis=1)
    rows = np.arange(len(points))
    signs = np.where(local[rows, face] >= 0.0, 1.0, -1.0)
    in_normal = np.zeros_like(local)
    in_normal[rows, face] = signs
    in_witness = local.copy()
    in_witness[rows, face] = signs * half[face]

    distance = np.where(is_outside, outside_norm, excess[rows, face])
    witness = np.where(is_outside[:, None], clamped, in_witness) + center
    normal = np.where(is_outside[:, None], out_normal, in_normal)
    return distance, witness, normal


def _sphere_query(
    points: np.ndarray, center: np.ndarray, radius: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    offset = points - center
    norm = np.linalg.norm(offset, axis=1)
    normal = np.zeros_like(offset)
    normal[:, 2] = 1.0
    safe = norm > _EPS
    normal[safe] = offset[safe] / norm[safe, None]
    return norm - radius, center + radius * normal, normal


def _hull_query(
    points: np.ndarray, part: RigidGeometry, margin: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    normals, offsets = part.planes
    plane_values = points @ normals.T + offsets
    face = np.argmax(plane_values, axis=1)
    rows = np.arange(len(points))
    bound = plane_values[rows, face]
    normal = normals[face].copy()
    witness = points - bound[:, None] * normal
    distance = bound.copy()
    vertices = part.support_vertices
    for index in np.flatnonzero((bound > 0.0) & (bound <= margin)):
        closest = gjk_closest_point(vertices, points[index])
        gap = points[index] - closest
        gap_norm = float(np.linalg.norm(gap))
        if gap_norm > _EPS:
            distance[index] = gap_norm
            witness[index] = closest
            normal[index] = gap / gap_norm
    return distance, witness, normal


def part_proximity(
    part: RigidGeometry,
    link_pose: RigidTransform,
    spheres: np.ndarray,
    *,
    margin: float = EXACT_MARGIN,
) -> Proximity:
    """Signed distance of each sphere ``(k, 4)`` to one primitive of a link."""

    frame = link_pose @ part.pose
    centers = spheres[:, :3]
    radii = spheres[:, 3]
    local = frame.inverse().apply(centers)

    # Bounding-sphere lower bound; far spheres skip the exact query.
    reach = local - part.local_center
    reach_norm = np.linalg.norm(reach, axis=1)
    lower = reach_norm - part.bounding_radius
    near = lower - radii <= margin

    distance = lower.copy()
    normal = np.zeros_like(local)
    normal[:, 2] = 1.0
    safe = reach_norm > _EPS
    normal[safe] = reach[safe] / reach_norm[safe, None]
    witness = part.local_center + part.bounding_radius * normal

    if np.any(near):
        points = local[near]
        if part.kind is GeometryKind.BOX:
            result = _box_query(points, part.center, part.half_extents)
        elif part.kind is GeometryKind.SPHERE:
            result = _sphere_query(points, part.center, float(part.radius))
        else:
            result = _hull_query(points, part, margin + float(radii[near].max()))
        distance[near], witness[near], normal[near] = result

    return Proximity(
        distance=distance - radii,
        witness=frame.apply(witness),
        normal=frame.apply_vector(normal),
    )


def link_proximity(
    parts: Sequence[RigidGeometry],
    link_pose: RigidTransform,
    spheres: np.ndarray,
    *,
    margin: float = EXACT_MARGIN,
) -> Proximity:
    """Closest part of a compound link for every sphere."""

    result = Proximity.empty(len(spheres))
    for part in parts:
        result = result.minimum(part_proximity(part, link_pose, spheres, margin=margin))
    return result


def table_proximity(table_height: float, spheres: np.ndarray) -> Proximity:
    """The table is the half-space ``z <= table_height``."""

    count = len(spheres)
    witness = spheres[:, :3].copy()
    witness[:, 2] = table_height
    normal = np.zeros((count, 3))
    normal[:, 2] = 1.0
    return Proximity(spheres[:, 2] - table_height - spheres[:, 3], witness, normal)


def point_distance(
    parts: Sequence[RigidGeometry], link_pose: RigidTransform, points: np.ndarray
) -> Proximity:
    """Exact unsigned-outside, signed-inside distance from points to a link."""

    spheres = np.column_stack([np.asarray(points, dtype=float), np.zeros(len(points))])
    return link_proximity(parts, link_pose, spheres, margin=np.inf)
