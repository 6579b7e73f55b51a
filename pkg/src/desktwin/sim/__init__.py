"""Quasi-static simulation of a robot chain pushing an articulated object."""

from .kinematics import ChainPose, forward_kinematics, robot_spheres, solve_ik
from .simulator import (
    ACTION_BOUND,
    CONTACT_TOLERANCE,
    Action,
    ContactFlag,
    ContactReport,
    SimState,
    clone_state,
    detect_contact,
    initial_state,
    rollout,
    split_motion,
    step,
)

__all__ = [
    "ACTION_BOUND",
    "CONTACT_TOLERANCE",
    "Action",
    "ChainPose",
    "ContactFlag",
    "ContactReport",
    "SimState",
    "clone_state",
    "detect_contact",
    "forward_kinematics",
    "initial_state",
    "robot_spheres",
    "rollout",
    "solve_ik",
    "split_motion",
    "step",
]
