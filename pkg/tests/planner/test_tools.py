from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from desktwin.model.chain import ToolAttachment, cartesian_gantry
from desktwin.model.geometry import RigidGeometry, RigidTransform
from desktwin.planner.tools import (
    attach_tool,
    load_tool,
    save_tool,
    semi_ring_tool,
    t_shaped_tool,
)
from desktwin.shared.error_handling import SceneFormatError, ValidationError
from desktwin.sim.kinematics import forward_kinematics


def test_t_shaped_tool_tip_is_the_crossbar_middle() -> None:
    tool = t_shaped_tool()

    assert [part.name for part in tool.parts] == ["shaft", "crossbar"]
    assert np.allclose(tool.tip, [-0.3575, 0.0, 0.0])
    assert tool.spheres[:, 0].min() < -0.35


def test_semi_ring_tool_opens_toward_the_robot() -> None:
    tool = semi_ring_tool(segments=5)

    ring = [part for part in tool.parts if part.name.startswith("ring_")]
    assert len(ring) == 5
    assert np.allclose(tool.tip, [-0.42, 0.0, 0.0])
    centers = np.array([part.pose.apply(part.center) for part in ring])
    assert np.all(centers[:, 0] <= -0.3 + 1e-9)
    assert np.allclose(np.linalg.norm(centers - [-0.36, 0.0, 0.0], axis=1), 0.06)


@pytest.mark.parametrize("builder", [t_shaped_tool, semi_ring_tool])
def test_tool_dimensions_must_be_positive(builder) -> None:
    with pytest.raises(ValidationError) as excinfo:
        builder(thickness=0.0)

    assert excinfo.value.field_path == "tool"


def test_attached_tool_moves_the_grasp_point() -> None:
    robot = attach_tool(cartesian_gantry(), t_shaped_tool())

    pose = forward_kinematics(robot, np.zeros(4))

    assert np.allclose(pose.grasp_point, [0.55 - 0.3575, 0.0, 0.45])
    assert np.allclose(pose.fingertip, [0.55, 0.0, 0.45])


def test_attach_raw_parts_with_grasp_and_tip() -> None:
    rod = RigidGeometry.box((0.05, 0.005, 0.005), (-0.05, 0.0, 0.0), name="rod")
    grasp = RigidTransform.from_translation((0.0, 0.0, -0.02))

    robot = attach_tool(cartesian_gantry(), [rod], grasp, tip=(-0.1, 0.0, 0.0))

    assert robot.tool is not None
    assert robot.tool.parts == (rod,)
    assert np.allclose(robot.tool.tip, [-0.1, 0.0, 0.0])
    assert robot.tool.grasp.allclose(grasp)


def test_empty_tool_detaches() -> None:
    robot = attach_tool(cartesian_gantry(), t_shaped_tool())

    assert attach_tool(robot, None).tool is None
    assert attach_tool(robot, []).tool is None


def test_regrasping_keeps_the_tool_geometry() -> None:
    tool = t_shaped_tool()
    grasp = RigidTransform.from_axis_angle((0.0, 0.0, 1.0), np.pi / 2)

    robot = attach_tool(cartesian_gantry(), tool, grasp)

    assert robot.tool.parts == tool.parts
    assert robot.tool.name == "t-shaped"
    assert robot.tool.grasp.allclose(grasp)


def test_builtin_tool_file(tmp_path: Path) -> None:
    path = tmp_path / "tool.json"
    path.write_text(json.dumps({"builtin": "t-shaped", "shaft_length": 0.3}), encoding="utf-8")

    tool = load_tool(path)

    assert np.allclose(tool.tip, [-0.3075, 0.0, 0.0])


def test_tool_file_round_trip(tmp_path: Path) -> None:
    path = tmp_path / "tools" / "ring.json"
    tool = semi_ring_tool()

    save_tool(tool, path)
    loaded = load_tool(path)

    assert isinstance(loaded, ToolAttachment)
    assert loaded.name == "semi-ring"
    assert np.allclose(loaded.tip, tool.tip)
    assert np.allclose(loaded.spheres, tool.spheres)


@pytest.mark.parametrize(
    ("document", "field_path"),
    [
        ({"builtin": "hook"}, "tool.builtin"),
        ({"builtin": "t-shaped", "length": 0.3}, "tool"),
        ({"parts": []}, "tool.parts"),
    ],
)
def test_bad_tool_files_are_format_errors(
    tmp_path: Path, document: dict, field_path: str
) -> None:
    path = tmp_path / "tool.json"
    path.write_text(json.dumps(document), encoding="utf-8")

    with pytest.raises(SceneFormatError) as excinfo:
        load_tool(path)

    assert excinfo.value.field_path == field_path
