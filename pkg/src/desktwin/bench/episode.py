"""One benchmark episode: perceive, push, reconstruct, plan and execute.

The ground-truth scene plays the real world. Only the affordance oracle
looks at it directly; the twin is built from the two rendered clouds and
the planner sees nothing but the twin.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict

import numpy as np

from ..affordance.oracle import Primitive, propose_actions, score_points, top_points
from ..affordance.selection import execute_push, select_executable
from ..config import BenchConfig, ConfigBundle
from ..model.articulation import ArticulatedObject, JointKind
from ..model.chain import ToolAttachment
from ..model.scene import Scene
from ..percept.camera import CameraPose, scene_camera
from ..percept.cloud import AFFORDANCE_POINTS, TWIN_POINTS, PointCloud, crop_bbox, downsample
from ..percept.render import render_point_cloud, scene_crop_box
from ..planner.config import PlanContext
from ..planner.mpc import mpc_execute
from ..planner.tools import attach_tool
from ..shared.error_handling import (
    AffordanceError,
    ErrorContext,
    InsufficientMotionError,
    NoExecutableActionError,
    PerceptionError,
    ReconstructionError,
    ValidationError,
)
from ..shared.observability import MetricsCollector, StructuredLogger
from ..sim.simulator import SimState, initial_state
from ..twin.builder import SignConvention, TwinModel, estimate_twin
from .generators import Category, axis_jitter

logger = logging.getLogger(__name__)

STAGE_TARGET = "target-out-of-range"
STAGE_AFFORDANCE = "affordance-infeasible"
STAGE_MOTION = "insufficient-motion"
STAGE_RECONSTRUCTION = "reconstruction-failed"
STAGE_TIMEOUT = "plan-timeout"

PRIMITIVES = {
    Category.DRAWER.value: Primitive.PUSH,
    Category.LAPTOP.value: Primitive.PUSH,
    Category.FAUCET.value: Primitive.PUSH_LEFT,
}
CONVENTIONS = {Category.FAUCET.value: SignConvention.CCW_ABOUT_UP}
# Room kept beyond the target when choosing its sign, for the interactive push.
TARGET_HEADROOM = {JointKind.PRISMATIC: 0.05, JointKind.REVOLUTE: 0.2}


@dataclass(frozen=True)
class EpisodeResult:
    """Outcome of one episode.

    ``delta_real`` is measured on the ground-truth world from the state the
    planner started in. ``stage`` names the pipeline stage that ended the
    episode early, or ``plan-timeout`` when the step budget ran out; it is
    ``None`` for a completed task.
    """

    category: str
    object_id: str
    seed: int
    s_initial: float
    s_target: float
    delta_target: float
    delta_real: float
    success: bool
    steps: int
    stage: str | None = None
    twin_kind: str | None = None
    kind_correct: bool | None = None
    axis_error_deg: float | None = None
    pivot_error: float | None = None
    push_displacement: float = 0.0
    low_confidence: bool = False
    error: Dict[str, Any] | None = field(default=None, compare=False)
    timings: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def delta(self) -> float:
        return self.delta_real - self.delta_target

    @property
    def delta_r(self) -> float:
        """Relative error in percent; positive when overshooting."""

        return self.delta / self.delta_target * 100.0

    def to_row(self) -> Dict[str, Any]:
        return {
            "category": self.category,
            "object_id": self.object_id,
            "seed": self.seed,
            "s_initial": self.s_initial,
            "s_target": self.s_target,
            "delta_target": self.delta_target,
            "delta_real": self.delta_real,
            "delta": self.delta,
            "delta_r": self.delta_r,
            "success": self.success,
            "steps": self.steps,
            "stage": self.stage or "",
            "twin_kind": self.twin_kind or "",
            "kind_correct": "" if self.kind_correct is None else self.kind_correct,
            "axis_error_deg": "" if self.axis_error_deg is None else self.axis_error_deg,
            "pivot_error": "" if self.pivot_error is None else self.pivot_error,
            "push_displacement": self.push_displacement,
            "low_confidence": self.low_confidence,
        }


RESULT_COLUMNS = tuple(
    EpisodeResult("", "", 0, 0.0, 1.0, 1.0, 0.0, False, 0).to_row().keys()
)


def stage_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([seed, stage]).generate_state(1)[0])


def sample_target(
    scene: Scene, bench: BenchConfig, seed: int, *, sign: float | None = None
) -> float:
    """Target displacement from the scene's current state.

    The magnitude is drawn from the category range. ``sign`` is honoured
    when the target plus some headroom for the interactive push stays
    within the joint limits; otherwise the other direction is used.
    """

    joint = scene.object.joint
    lo, hi = bench.prismatic_delta if joint.kind is JointKind.PRISMATIC else bench.revolute_delta
    rng = np.random.default_rng([seed, 11])
    magnitude = float(rng.uniform(lo, hi))
    preferred = float(sign) if sign else (1.0 if rng.random() < 0.5 else -1.0)
    room = {1.0: joint.upper - joint.state, -1.0: joint.state - joint.lower}
    headroom = TARGET_HEADROOM[joint.kind]
    for candidate in (preferred, -preferred):
        if room[candidate] >= magnitude + headroom:
            return candidate * magnitude
    wider = max(room, key=lambda key: room[key])
    return wider * min(magnitude, 0.5 * room[wider])


# ============================================================================
# Twin quality
# ============================================================================

def axis_error_deg(estimated: ArticulatedObject, truth: ArticulatedObject) -> float:
    """Angle between the two joint axes as lines, in degrees."""

    axis, _ = estimated.world_axis()
    true_axis, _ = truth.world_axis()
    cosine = min(1.0, abs(float(axis @ true_axis)))
    return math.degrees(math.acos(cosine))


def pivot_error(estimated: ArticulatedObject, truth: ArticulatedObject) -> float | None:
    """Distance of the estimated pivot from the true rotation axis; revolute only."""

    if estimated.joint.kind is not JointKind.REVOLUTE or truth.joint.kind is not JointKind.REVOLUTE:
        return None
    _, pivot = estimated.world_axis()
    true_axis, true_pivot = truth.world_axis()
    offset = pivot - true_pivot
    return float(np.linalg.norm(offset - (offset @ true_axis) * true_axis))


# ============================================================================
# Stages
# ============================================================================

@dataclass
class _Observation:
    camera: CameraPose
    before: PointCloud
    after: PointCloud
    state: SimState
    displacement: float


def _render(
    world: Scene, s: float, camera: CameraPose, bundle: ConfigBundle, seed: int
) -> PointCloud:
    return render_point_cloud(world, s, camera, replace(bundle.noise, seed=seed))


def _crop(cloud: PointCloud, world: Scene, states: list[float]) -> PointCloud:
    lower, upper = scene_crop_box(world, states, world.sensing.crop_margin)
    return crop_bbox(cloud, lower, upper)


def _interact(
    world: Scene, bundle: ConfigBundle, seed: int, metrics: MetricsCollector
) -> tuple[_Observation, TwinModel]:
    """Push until the two observations show motion, then reconstruct."""

    aff = bundle.affordance
    bench = bundle.bench
    primitive = PRIMITIVES.get(world.category, Primitive.PUSH)
    convention = CONVENTIONS.get(world.category, SignConvention.AWAY_FROM_BASE)
    camera = scene_camera(world, stage_seed(seed, 0))
    state = initial_state(world)

    with metrics.time("perceive"):
        raw = _render(world, state.s, camera, bundle, stage_seed(seed, 1))
        observed = downsample(_crop(raw, world, [state.s]), AFFORDANCE_POINTS, stage_seed(seed, 2))
    with metrics.time("push"):
        scored = score_points(observed, world, primitive, seed=stage_seed(seed, 3), config=aff)
        ranked = top_points(scored, len(scored))
    if not ranked:
        raise NoExecutableActionError("no observed point is actionable")

    tried: set[int] = set()
    for attempt in range(bench.push_attempts):
        candidates = [point for point in ranked if point.index not in tried][: aff.n_p]
        if not candidates:
            break
        with metrics.time("push"):
            proposals = [
                [
                    item
                    for item in propose_actions(point, primitive, aff.n_a, world=world, config=aff)
                    if item.success > 0.0
                ]
                for point in candidates
            ]
            if not any(proposals):
                raise NoExecutableActionError("no proposal moves the object")
            plan = select_executable(proposals, world, state, config=aff)
            tried.update(
                point.index for point, items in zip(candidates, proposals) if plan.proposal in items
            )
            before_state = state
            before = _render(
                world, before_state.s, camera, bundle, stage_seed(seed, 10 + 2 * attempt)
            )
            state, displacement = execute_push(world, state, plan)
        with metrics.time("perceive"):
            after = _render(world, state.s, camera, bundle, stage_seed(seed, 11 + 2 * attempt))
            states = [before_state.s, state.s]
            cloud0 = downsample(_crop(before, world, states), TWIN_POINTS, stage_seed(seed, 4))
            cloud1 = downsample(_crop(after, world, states), TWIN_POINTS, stage_seed(seed, 5))
        if not bench.interactive:
            cloud0 = cloud1
        try:
            with metrics.time("reconstruct"):
                twin = estimate_twin(
                    cloud0,
                    cloud1,
                    config=bundle.twin_config(),
                    convention=convention,
                    allow_static_fallback=not bench.interactive,
                    name=f"{world.scene_id}-twin",
                    category=world.category,
                )
        except InsufficientMotionError:
            if attempt + 1 == bench.push_attempts:
                raise
            logger.info("Push %d moved too few points; trying the next candidate", attempt + 1)
            continue
        observation = _Observation(camera, cloud0, cloud1, state, displacement)
        return observation, twin
    raise InsufficientMotionError("every push attempt left the object in place")


# ============================================================================
# Episode
# ============================================================================

def run_episode(
    scene: Scene,
    delta_target: float,
    bundle: ConfigBundle | None = None,
    seed: int = 0,
    *,
    tool: ToolAttachment | None = None,
    trace: StructuredLogger | None = None,
) -> EpisodeResult:
    """Run the full pipeline on the ground-truth ``scene``.

    Stage failures are returned as failed results; only an invalid target
    raises.

    Raises:
        ValidationError: ``delta_target`` is zero or leaves the joint limits
            from the scene's current state.
    """

    bundle = bundle or ConfigBundle.desk()
    bench = bundle.bench
    joint = scene.object.joint
    if delta_target == 0.0 or not joint.contains(joint.state + delta_target):
        raise ValidationError(
            f"target displacement {delta_target} from {joint.state} must be non-zero"
            f" and stay within {list(joint.limits)}",
            field_path="episode.delta_target",
            invalid_value=delta_target,
        )

    metrics = MetricsCollector()
    world = bundle.camera.apply(scene, bundle.noise)
    world = axis_jitter(world, bench.axis_jitter_deg, seed)
    logger.info("Episode %s seed %d: target displacement %.4f", scene.scene_id, seed, delta_target)

    def failed(
        stage: str, s_initial: float, context: ErrorContext | None = None, **extra: Any
    ) -> EpisodeResult:
        logger.info("Episode %s failed at stage %s", scene.scene_id, stage)
        return EpisodeResult(
            category=scene.category,
            object_id=scene.scene_id,
            seed=seed,
            s_initial=s_initial,
            s_target=s_initial + delta_target,
            delta_target=delta_target,
            delta_real=0.0,
            success=False,
            steps=0,
            stage=stage,
            error=context.get_summary() if context is not None else None,
            timings=metrics.snapshot(),
            **extra,
        )

    twin: TwinModel | None = None
    push_displacement = 0.0
    if bench.oracle_twin:
        real_state = initial_state(world)
        twin_object = scene.object
        twin_s = scene.object.state
    else:
        stage = ErrorContext("interact")
        try:
            with stage:
                observation, twin = _interact(world, bundle, seed, metrics)
        except AffordanceError:
            return failed(STAGE_AFFORDANCE, joint.state, stage)
        except InsufficientMotionError:
            return failed(STAGE_MOTION, joint.state, stage)
        except (ReconstructionError, PerceptionError):
            return failed(STAGE_RECONSTRUCTION, joint.state, stage)
        real_state = observation.state
        push_displacement = observation.displacement
        twin_object = twin.object
        twin_s = twin.s1

    quality: Dict[str, Any] = {
        "twin_kind": twin_object.joint.kind.value,
        "kind_correct": twin_object.joint.kind is joint.kind,
        "axis_error_deg": axis_error_deg(twin_object, scene.object),
        "pivot_error": pivot_error(twin_object, scene.object),
        "push_displacement": push_displacement,
        "low_confidence": twin.low_confidence if twin is not None else False,
    }
    s_initial = real_state.s
    if not world.object.joint.contains(s_initial + delta_target):
        return failed(STAGE_TARGET, s_initial, **quality)

    robot = world.robot if tool is None else attach_tool(world.robot, tool)
    real_world = world.with_robot(robot)
    twin_scene = Scene(
        object=twin_object.with_state(twin_s),
        robot=robot,
        q0=real_state.q,
        table_height=world.table_height,
        scene_id=f"{scene.scene_id}-plan",
        category=scene.category,
    )
    ctx = PlanContext(twin_s, twin_s + delta_target, tool_attached=tool is not None)
    with metrics.time("plan"):
        trajectory = mpc_execute(
            twin_scene,
            real_world,
            SimState(q=real_state.q, s=twin_s),
            SimState(q=real_state.q, s=s_initial),
            ctx,
            bundle.icem,
            bundle.reward,
            stage_seed(seed, 6),
            trace=trace,
            metrics=metrics,
        )
    delta_real = trajectory.final_real.s - s_initial
    result = EpisodeResult(
        category=scene.category,
        object_id=scene.scene_id,
        seed=seed,
        s_initial=s_initial,
        s_target=s_initial + delta_target,
        delta_target=delta_target,
        delta_real=delta_real,
        success=trajectory.success,
        steps=trajectory.steps,
        stage=None if trajectory.success else STAGE_TIMEOUT,
        timings=metrics.snapshot(),
        **quality,
    )
    if trace is not None:
        trace.log("episode", **result.to_row())
    logger.info(
        "Episode %s: delta %.4f (%.1f%%) after %d steps",
        scene.scene_id,
        result.delta,
        result.delta_r,
        result.steps,
    )
    return result
