"""Forward kinematics, sphere proxies and damped least-squares IK for serial chains."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..model.articulation import JointKind
from ..model.chain import ChainJoint, KinematicChain
from ..model.geometry import RigidTransform, axis_angle_matrix
from ..shared.error_handling import ValidationError

logger = logging.getLogger(__name__)

IK_MAX_ITERATIONS = 200
IK_TOLERANCE = 1e-3
IK_DAMPING = 0.05

# Sphere roles in ``robot_spheres``.
PUSHER = 0
LINK = 1


@dataclass(frozen=True, eq=False)
class ChainPose:
    """World poses produced by ``forward_kinematics``.

    Attributes:
        joint_frames: World frame of each joint before its motion is applied
            (origin of the joint axis).
        link_poses: World pose of each link after its joint.
        mount: Fingertip mount frame; its origin is the fingertip center.
        tool_pose: World pose of the attached tool frame, if any.
        grasp_point: Fingertip center, or the tool tip when a tool is attached.
    """

    joint_frames: tuple[RigidTransform, ...]
    link_poses: tuple[RigidTransform, ...]
    mount: RigidTransform
    tool_pose: RigidTransform | None
    grasp_point: np.ndarray

    @property
    def fingertip(self) -> np.ndarray:
        return self.mount.translation


def joint_motion(joint: ChainJoint, value: float) -> RigidTransform:
    if joint.kind is JointKind.PRISMATIC:
        return RigidTransform._trusted(np.eye(3), joint.axis * float(value))
    return RigidTransform._trusted(axis_angle_matrix(joint.axis, float(value)), np.zeros(3))


def forward_kinematics(
    chain: KinematicChain, q: np.ndarray, *, check_limits: bool = True
) -> ChainPose:
    """Compose joint transforms from the chain base to the fingertip mount."""

    q = np.asarray(q, dtype=float)
    if q.shape != (chain.dof,):
        raise ValidationError(f"q must have {chain.dof} entries", field_path="q")
    if check_limits and not chain.within_limits(q, tolerance=1e-9):
        raise ValidationError(
            "q outside robot joint limits", field_path="q", invalid_value=q.tolist()
        )

    frame = chain.base_pose
    joint_frames = []
    link_poses = []
    for joint, value in zip(chain.joints, q):
        frame = frame @ joint.origin
        joint_frames.append(frame)
        frame = frame @ joint_motion(joint, value)
        link_poses.append(frame)
    mount = frame @ chain.fingertip_offset
    tool_pose = None
    grasp_point = mount.translation
    if chain.tool is not None:
        tool_pose = mount @ chain.tool.grasp
        grasp_point = tool_pose.apply(chain.tool.tip)
    return ChainPose(tuple(joint_frames), tuple(link_poses), mount, tool_pose, grasp_point)


def robot_spheres(chain: KinematicChain, pose: ChainPose) -> tuple[np.ndarray, np.ndarray]:
    """World sphere proxies ``(k, 4)`` and their roles (``PUSHER`` or ``LINK``).

    The fingertip and every tool sphere may push the movable link; link
    spheres may not.
    """

    blocks = [np.append(pose.mount.translation, chain.fingertip_radius)[None, :]]
    roles = [PUSHER]
    if chain.tool is not None and pose.tool_pose is not None:
        tool = chain.tool.spheres
        blocks.append(np.column_stack([pose.tool_pose.apply(tool[:, :3]), tool[:, 3]]))
        roles += [PUSHER] * len(tool)
    for link_pose, spheres in zip(pose.link_poses, chain.link_spheres):
        if len(spheres):
            blocks.append(np.column_stack([link_pose.apply(spheres[:, :3]), spheres[:, 3]]))
            roles += [LINK] * len(spheres)
    return np.vstack(blocks), np.array(roles, dtype=np.int8)


def position_jacobian(chain: KinematicChain, pose: ChainPose, point: np.ndarray) -> np.ndarray:
    """Jacobian ``(3, d)`` of a point rigidly attached to the last link."""

    columns = []
    for joint, frame in zip(chain.joints, pose.joint_frames):
        axis = frame.rotation @ joint.axis
        if joint.kind is JointKind.PRISMATIC:
            columns.append(axis)
        else:
            columns.append(np.cross(axis, point - frame.translation))
    return np.column_stack(columns)


def solve_ik(
    chain: KinematicChain,
    target: np.ndarray,
    q_init: np.ndarray | None = None,
    *,
    max_iterations: int = IK_MAX_ITERATIONS,
    tolerance: float = IK_TOLERANCE,
    damping: float = IK_DAMPING,
) -> tuple[np.ndarray, bool]:
    """Place the fingertip center at ``target`` by damped least squares.

    Returns the last iterate (clamped to joint limits) and whether the
    position error dropped below ``tolerance``.
    """

    target = np.asarray(target, dtype=float)
    q = chain.clamp(np.zeros(chain.dof) if q_init is None else q_init)
    damping_sq = damping * damping
    for _ in range(max_iterations):
        pose = forward_kinematics(chain, q, check_limits=False)
        error = target - pose.fingertip
        if float(np.linalg.norm(error)) < tolerance:
            return q, True
        jacobian = position_jacobian(chain, pose, pose.fingertip)
        gram = jacobian @ jacobian.T + damping_sq * np.eye(3)
        q = chain.clamp(q + jacobian.T @ np.linalg.solve(gram, error))
    pose = forward_kinematics(chain, q, check_limits=False)
    converged = float(np.linalg.norm(target - pose.fingertip)) < tolerance
    if not converged:
        logger.debug("IK did not converge for target %s", np.round(target, 4).tolist())
    return q, converged
