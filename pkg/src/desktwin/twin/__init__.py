"""Digital-twin reconstruction from a before/after pair of point clouds."""

from .builder import (
    SignConvention,
    TwinConfig,
    TwinModel,
    build_twin,
    estimate_twin,
    link_hull,
    load_twin,
    replay_push,
    save_twin,
    static_twin,
)
from .registration import RegistrationResult, register_segments, trimmed_icp
from .screw import THETA_MIN, JointEstimate, ScrewMotion, classify_joint, screw_decompose
from .segmentation import SegmentationMask, default_tau, segment_moving

__all__ = [
    "JointEstimate",
    "RegistrationResult",
    "ScrewMotion",
    "SegmentationMask",
    "SignConvention",
    "THETA_MIN",
    "TwinConfig",
    "TwinModel",
    "build_twin",
    "classify_joint",
    "default_tau",
    "estimate_twin",
    "link_hull",
    "load_twin",
    "register_segments",
    "replay_push",
    "save_twin",
    "screw_decompose",
    "segment_moving",
    "static_twin",
    "trimmed_icp",
]
