"""Tools mounted at the robot fingertip."""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from ..model.chain import KinematicChain, ToolAttachment
from ..model.geometry import RigidGeometry, RigidTransform
from ..shared.config import read_document
from ..shared.error_handling import SceneFormatError, ValidationError

logger = logging.getLogger(__name__)


def attach_tool(
    chain: KinematicChain,
    tool: ToolAttachment | Sequence[RigidGeometry] | None,
    grasp: RigidTransform | None = None,
    *,
    tip: Sequence[float] | None = None,
) -> KinematicChain:
    """Mount ``tool`` rigidly at the fingertip; an empty tool detaches.

    Raw geometry is wrapped in a ``ToolAttachment`` placed by ``grasp``
    with its working tip at ``tip`` (tool frame).
    """

    if tool is None:
        return chain.with_tool(None)
    if not isinstance(tool, ToolAttachment):
        parts = tuple(tool)
        if not parts:
            return chain.with_tool(None)
        tool = ToolAttachment(
            parts=parts,
            grasp=grasp or RigidTransform.identity(),
            tip=np.zeros(3) if tip is None else np.asarray(tip, dtype=float),
        )
    elif grasp is not None:
        tool = ToolAttachment(
            tool.parts, grasp, tool.tip if tip is None else np.asarray(tip), tool.name
        )
    logger.debug("Attached %s with %d collision spheres", tool.name, len(tool.spheres))
    return chain.with_tool(tool)


def t_shaped_tool(
    shaft_length: float = 0.35,
    crossbar_length: float = 0.12,
    thickness: float = 0.015,
) -> ToolAttachment:
    """Shaft along -x from the mount ending in a crossbar along y.

    The working tip is the crossbar midpoint, so the crossbar can hook
    behind a handle and pull.
    """

    if min(shaft_length, crossbar_length, thickness) <= 0.0:
        raise ValidationError("tool dimensions must be positive", field_path="tool")
    half = thickness / 2.0
    shaft = RigidGeometry.box(
        (shaft_length / 2.0, half, half), (-shaft_length / 2.0, 0.0, 0.0), name="shaft"
    )
    crossbar = RigidGeometry.box(
        (half, crossbar_length / 2.0, half), (-shaft_length - half, 0.0, 0.0), name="crossbar"
    )
    return ToolAttachment(
        parts=(shaft, crossbar), tip=np.array([-shaft_length - half, 0.0, 0.0]), name="t-shaped"
    )


def semi_ring_tool(
    shaft_length: float = 0.3,
    ring_radius: float = 0.06,
    thickness: float = 0.015,
    segments: int = 7,
) -> ToolAttachment:
    """Shaft along -x ending in a half ring that opens toward the robot.

    The working tip is the middle of the ring's far arc.
    """

    if min(shaft_length, ring_radius, thickness) <= 0.0 or segments < 2:
        raise ValidationError("tool dimensions must be positive", field_path="tool")
    half = thickness / 2.0
    parts = [
        RigidGeometry.box(
            (shaft_length / 2.0, half, half), (-shaft_length / 2.0, 0.0, 0.0), name="shaft"
        )
    ]
    center = np.array([-shaft_length - ring_radius, 0.0, 0.0])
    chord = 2.0 * ring_radius * math.sin(math.pi / (2.0 * segments))
    for index in range(segments):
        # Arc from +y through -x to -y around the ring center.
        angle = math.pi / 2.0 + math.pi * (index + 0.5) / segments
        offset = ring_radius * np.array([math.cos(angle), math.sin(angle), 0.0])
        parts.append(
            RigidGeometry.box(
                (chord / 2.0 + half, half, half),
                (0.0, 0.0, 0.0),
                pose=RigidTransform.from_rpy((0.0, 0.0, angle + math.pi / 2.0), center + offset),
                name=f"ring_{index}",
            )
        )
    tip = center + np.array([-ring_radius, 0.0, 0.0])
    return ToolAttachment(parts=tuple(parts), tip=tip, name="semi-ring")


TOOL_BUILDERS = {"t-shaped": t_shaped_tool, "semi-ring": semi_ring_tool}


def load_tool(path: Path) -> ToolAttachment:
    """Tool from a JSON/YAML file; ``{"builtin": "t-shaped"}`` selects a builder."""

    document = read_document(path, error_cls=SceneFormatError)
    builtin = document.get("builtin")
    if builtin is not None:
        if builtin not in TOOL_BUILDERS:
            raise SceneFormatError(f"unknown builtin tool '{builtin}'", field_path="tool.builtin")
        options = {key: value for key, value in document.items() if key != "builtin"}
        try:
            return TOOL_BUILDERS[builtin](**options)
        except TypeError as exc:
            raise SceneFormatError(str(exc), field_path="tool") from exc
    try:
        return ToolAttachment.from_dict(document)
    except ValidationError as exc:
        raise SceneFormatError(exc.message, field_path=exc.field_path) from exc


def save_tool(tool: ToolAttachment, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(tool.to_dict(), indent=2) + "\n", encoding="utf-8")
