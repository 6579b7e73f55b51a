"""Sampling-based MPC on a reconstructed twin."""

from .config import ICEMConfig, PlanContext, RewardWeights
from .icem import (
    ReplanResult,
    evaluate_rollouts,
    fit_elites,
    icem_optimize,
    icem_replan,
    rollout_rewards,
    shift_sequences,
)
from .mpc import PlannedTrajectory, StepRecord, mpc_execute
from .noise import NOISE_AMPLITUDE_BOUND, powerlaw_noise, sample_population
from .reward import RewardBreakdown, grasp_point, reward
from .tools import attach_tool, load_tool, save_tool, semi_ring_tool, t_shaped_tool

__all__ = [
    "ICEMConfig",
    "NOISE_AMPLITUDE_BOUND",
    "PlanContext",
    "PlannedTrajectory",
    "ReplanResult",
    "RewardBreakdown",
    "RewardWeights",
    "StepRecord",
    "attach_tool",
    "evaluate_rollouts",
    "fit_elites",
    "grasp_point",
    "icem_optimize",
    "icem_replan",
    "load_tool",
    "mpc_execute",
    "powerlaw_noise",
    "reward",
    "rollout_rewards",
    "sample_population",
    "save_tool",
    "semi_ring_tool",
    "shift_sequences",
    "t_shaped_tool",
]
