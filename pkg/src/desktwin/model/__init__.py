"""Articulated objects, robot chains, scenes and their file formats."""

from .articulation import ArticulatedObject, JointKind, JointSpec, movable_pose
from .chain import ChainJoint, KinematicChain, ToolAttachment, cartesian_gantry
from .geometry import GeometryKind, RigidGeometry, RigidTransform
from .scene import Scene, SceneSensing, load_scene, save_scene, scene_from_dict
from .urdf import export_urdf, import_urdf

__all__ = [
    "ArticulatedObject",
    "ChainJoint",
    "GeometryKind",
    "JointKind",
    "JointSpec",
    "KinematicChain",
    "RigidGeometry",
    "RigidTransform",
    "Scene",
    "SceneSensing",
    "ToolAttachment",
    "cartesian_gantry",
    "export_urdf",
    "import_urdf",
    "load_scene",
    "movable_pose",
    "save_scene",
    "scene_from_dict",
]
