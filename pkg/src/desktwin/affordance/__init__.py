"""Interactive perception: score push affordances and execute one push."""

from .oracle import (
    ActionProposal,
    AffordanceConfig,
    Primitive,
    ScoredPoint,
    propose_actions,
    push_once,
    pusher_chain,
    sample_directions,
    score_points,
    snap_to_surface,
    top_points,
)
from .selection import PushPlan, execute_push, fingertip_waypoints, plan_push, select_executable

__all__ = [
    "ActionProposal",
    "AffordanceConfig",
    "Primitive",
    "PushPlan",
    "ScoredPoint",
    "execute_push",
    "fingertip_waypoints",
    "plan_push",
    "propose_actions",
    "push_once",
    "pusher_chain",
    "sample_directions",
    "score_points",
    "select_executable",
    "snap_to_surface",
    "top_points",
]
