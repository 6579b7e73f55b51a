"""URDF 1.0 export and import for single-joint articulated objects.

The exported robot has a ``world`` link, a fixed joint carrying the object
pose, the ``base`` and ``movable`` links and one articulation joint. Hull
and mesh primitives are written as ASCII OBJ files under ``meshes/`` next to
the URDF and referenced relatively.
"""
from __future__ import annotations

import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..shared.error_handling import SceneFormatError
from .articulation import ArticulatedObject, JointKind, JointSpec
from .geometry import GeometryKind, RigidGeometry, RigidTransform

logger = logging.getLogger(__name__)

HULL_MARKER = "# desktwin hull"


def _fmt(values: Iterable[float]) -> str:
    return " ".join(repr(float(value)) for value in values)


def _parse_floats(text: str | None, count: int, where: str) -> np.ndarray:
    if text is None:
        return np.zeros(count)
    try:
        values = np.array([float(token) for token in text.split()])
    except ValueError as exc:
        raise SceneFormatError(f"non-numeric values '{text}'", field_path=where) from exc
    if values.shape != (count,):
        raise SceneFormatError(f"expected {count} values, got '{text}'", field_path=where)
    return values


# ============================================================================
# OBJ meshes
# ============================================================================

def write_obj(path: Path, vertices: np.ndarray, faces: np.ndarray, *, hull: bool) -> None:
    lines = [HULL_MARKER if hull else "# desktwin mesh"]
    lines += [f"v {_fmt(vertex)}" for vertex in vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_obj(path: Path) -> tuple[np.ndarray, np.ndarray, bool]:
    """Return ``(vertices, faces, is_hull)`` from an ASCII OBJ file."""

    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise SceneFormatError(f"mesh file not found: {path}", field_path="mesh.filename") from exc
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    hull = False
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped == HULL_MARKER:
            hull = True
        if not stripped or stripped.startswith("#"):
            continue
        tag, *fields = stripped.split()
        if tag == "v":
            vertices.append([float(value) for value in fields[:3]])
        elif tag == "f":
            # Polygons are fanned into triangles; "v/vt/vn" keeps the vertex index.
            indices = [int(token.split("/")[0]) - 1 for token in fields]
            for k in range(1, len(indices) - 1):
                faces.append([indices[0], indices[k], indices[k + 1]])
        elif tag not in {"vn", "vt", "o", "g", "s", "usemtl", "mtllib"}:
            raise SceneFormatError(
                f"unsupported OBJ record '{tag}' on line {number}", field_path=str(path)
            )
    return np.array(vertices, dtype=float), np.array(faces, dtype=np.int64).reshape(-1, 3), hull


# ============================================================================
# Export
# ============================================================================

def _origin(parent: ET.Element, transform: RigidTransform) -> None:
    ET.SubElement(parent, "origin", xyz=_fmt(transform.translation), rpy=_fmt(transform.rpy))


def _geometry_element(
    link_element: ET.Element,
    tag: str,
    part: RigidGeometry,
    frame: RigidTransform,
    mesh_path: str | None,
) -> None:
    element = ET.SubElement(link_element, tag)
    if part.name:
        element.set("name", part.name)
    geometry = ET.Element("geometry")
    pose = frame @ part.pose
    if part.kind is GeometryKind.BOX:
        _origin(element, pose @ RigidTransform.from_translation(part.center))
        ET.SubElement(geometry, "box", size=_fmt(2.0 * part.half_extents))
    elif part.kind is GeometryKind.SPHERE:
        _origin(element, pose @ RigidTransform.from_translation(part.center))
        ET.SubElement(geometry, "sphere", radius=repr(float(part.radius)))
    else:
        _origin(element, pose)
        ET.SubElement(geometry, "mesh", filename=mesh_path or "")
    element.append(geometry)


def _hull_faces(part: RigidGeometry) -> tuple[np.ndarray, np.ndarray]:
    hull = part._qhull
    vertices = part.vertices
    faces = hull.simplices.copy()
    # Orient every triangle so its normal agrees with the facet equation.
    for index, (a, b, c) in enumerate(faces):
        normal = np.cross(vertices[b] - vertices[a], vertices[c] - vertices[a])
        if normal @ hull.equations[index, :3] < 0.0:
            faces[index] = (a, c, b)
    return vertices, faces


def _write_link(
    root: ET.Element,
    name: str,
    parts: Sequence[RigidGeometry],
    frame: RigidTransform,
    out_dir: Path,
) -> None:
    link = ET.SubElement(root, "link", name=name)
    for index, part in enumerate(parts):
        mesh_path = None
        if part.kind in (GeometryKind.HULL, GeometryKind.MESH):
            mesh_path = f"meshes/{name}_{index}.obj"
            if part.kind is GeometryKind.HULL:
                vertices, faces = _hull_faces(part)
            else:
                vertices, faces = part.vertices, part.faces
            write_obj(out_dir / mesh_path, vertices, faces, hull=part.kind is GeometryKind.HULL)
        _geometry_element(link, "visual", part, frame, mesh_path)
        _geometry_element(link, "collision", part, frame, mesh_path)


def export_urdf(obj: ArticulatedObject, out: Path) -> None:
    """Write ``obj`` as URDF to ``out`` with OBJ meshes beside it."""

    out = Path(out)
    out_dir = out.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    joint = obj.joint
    root = ET.Element("robot", name=obj.name or "articulated_object")
    ET.SubElement(root, "link", name="world")

    fixed = ET.SubElement(root, "joint", name="world_to_base", type="fixed")
    ET.SubElement(fixed, "parent", link="world")
    ET.SubElement(fixed, "child", link="base")
    _origin(fixed, obj.pose)

    child_origin = (
        RigidTransform.from_translation(joint.pivot)
        if joint.kind is JointKind.REVOLUTE
        else RigidTransform.identity()
    )
    _write_link(root, "base", obj.base, RigidTransform.identity(), out_dir)
    _write_link(root, "movable", obj.movable, child_origin.inverse(), out_dir)

    articulation = ET.SubElement(root, "joint", name="articulation", type=joint.kind.value)
    ET.SubElement(articulation, "parent", link="base")
    ET.SubElement(articulation, "child", link="movable")
    _origin(articulation, child_origin)
    ET.SubElement(articulation, "axis", xyz=_fmt(joint.axis))
    ET.SubElement(
        articulation,
        "limit",
        lower=repr(joint.lower),
        upper=repr(joint.upper),
        effort="0.0",
        velocity="0.0",
    )
    # Non-standard element; URDF consumers ignore it.
    ET.SubElement(root, "desktwin", state=repr(joint.state), category=obj.category)

    tree = ET.ElementTree(root)
    ET.indent(tree)
    try:
        tree.write(out, encoding="unicode", xml_declaration=True)
    except OSError:
        logger.exception("Failed to write URDF %s", out)
        raise
    logger.info("Exported %s joint URDF to %s", joint.kind.value, out)


# ============================================================================
# Import
# ============================================================================

def _read_origin(element: ET.Element | None, where: str) -> RigidTransform:
    if element is None:
        return RigidTransform.identity()
    return RigidTransform.from_rpy(
        _parse_floats(element.get("rpy"), 3, f"{where}.rpy"),
        _parse_floats(element.get("xyz"), 3, f"{where}.xyz"),
    )


def _read_link(
    link: ET.Element, base_dir: Path, frame: RigidTransform
) -> tuple[RigidGeometry, ...]:
    parts = []
    link_name = link.get("name", "link")
    for index, collision in enumerate(link.findall("collision")):
        where = f"{link_name}.collision[{index}]"
        pose = frame @ _read_origin(collision.find("origin"), f"{where}.origin")
        geometry = collision.find("geometry")
        if geometry is None or len(geometry) != 1:
            raise SceneFormatError("collision needs exactly one geometry", field_path=where)
        shape = geometry[0]
        name = collision.get("name", "")
        if shape.tag == "box":
            size = _parse_floats(shape.get("size"), 3, f"{where}.box.size")
            parts.append(RigidGeometry.box(size / 2.0, pose=pose, name=name))
        elif shape.tag == "sphere":
            radius = _parse_floats(shape.get("radius"), 1, f"{where}.sphere.radius")[0]
            parts.append(RigidGeometry.sphere(radius, pose=pose, name=name))
        elif shape.tag == "mesh":
            filename = shape.get("filename")
            if not filename:
                raise SceneFormatError("mesh needs a filename", field_path=f"{where}.mesh")
            vertices, faces, is_hull = read_obj(base_dir / filename)
            if is_hull:
                parts.append(RigidGeometry.hull(vertices, pose=pose, name=name))
            else:
                parts.append(RigidGeometry.mesh(vertices, faces, pose=pose, name=name))
        else:
            raise SceneFormatError(f"unsupported geometry '{shape.tag}'", field_path=where)
    return tuple(parts)


def import_urdf(path: Path) -> ArticulatedObject:
    """Load a URDF written by ``export_urdf`` (or any two-link, one-joint URDF)."""

    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except (ET.ParseError, OSError) as exc:
        raise SceneFormatError(f"cannot parse URDF {path}: {exc}", field_path="urdf") from exc

    joints = [
        j for j in root.findall("joint") if j.get("type") in ("revolute", "prismatic", "continuous")
    ]
    if len(joints) != 1:
        raise SceneFormatError(
            f"expected one movable joint, found {len(joints)}", field_path="urdf.joint"
        )
    articulation = joints[0]
    parent = articulation.find("parent")
    child = articulation.find("child")
    if parent is None or child is None:
        raise SceneFormatError("joint needs parent and child", field_path="urdf.joint")
    links = {link.get("name"): link for link in root.findall("link")}
    base_name, movable_name = parent.get("link"), child.get("link")
    if base_name not in links or movable_name not in links:
        raise SceneFormatError("joint references unknown links", field_path="urdf.joint")

    pose = RigidTransform.identity()
    for fixed in root.findall("joint"):
        child_element = fixed.find("child")
        if (
            fixed.get("type") == "fixed"
            and child_element is not None
            and child_element.get("link") == base_name
        ):
            pose = _read_origin(fixed.find("origin"), "urdf.world_to_base.origin")

    origin = _read_origin(articulation.find("origin"), "urdf.joint.origin")
    axis_element = articulation.find("axis")
    axis_local = _parse_floats(
        axis_element.get("xyz") if axis_element is not None else "1 0 0", 3, "joint.axis"
    )
    axis = origin.apply_vector(axis_local / np.linalg.norm(axis_local))
    limit = articulation.find("limit")
    kind = JointKind.PRISMATIC if articulation.get("type") == "prismatic" else JointKind.REVOLUTE
    if limit is not None and limit.get("lower") is not None and limit.get("upper") is not None:
        limits = (float(limit.get("lower")), float(limit.get("upper")))
    else:
        limits = (-np.pi, np.pi)
    extra = root.find("desktwin")
    if extra is not None:
        state = float(extra.get("state", limits[0]))
    else:
        state = min(max(0.0, limits[0]), limits[1])
    category = extra.get("category", "") if extra is not None else ""

    joint = JointSpec(
        kind=kind,
        axis=axis,
        pivot=origin.translation if kind is JointKind.REVOLUTE else np.zeros(3),
        limits=limits,
        state=state,
    )
    base_dir = path.parent
    return ArticulatedObject(
        base=_read_link(links[base_name], base_dir, RigidTransform.identity()),
        movable=_read_link(links[movable_name], base_dir, origin),
        joint=joint,
        pose=pose,
        name=root.get("name", ""),
        category=category,
    )
