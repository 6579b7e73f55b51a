"""Command-line entry point: benchmarks, single episodes and the pipeline stages."""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import IO, Any, Callable, Dict, Iterator, Sequence

if __package__ in {None, ""}:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from desktwin.affordance.oracle import propose_actions, score_points, top_points  # noqa: E402
from desktwin.bench.ablation import AblationMode, run_ablation  # noqa: E402
from desktwin.bench.episode import CONVENTIONS, PRIMITIVES, run_episode  # noqa: E402
from desktwin.bench.generators import (  # noqa: E402
    Category,
    generate_scene,
    tool_reach_drawer_scene,
)
from desktwin.bench.report import emit_report, format_table  # noqa: E402
from desktwin.bench.stats import run_benchmark  # noqa: E402
from desktwin.config import ConfigBundle, load_config  # noqa: E402
from desktwin.model.chain import ToolAttachment  # noqa: E402
from desktwin.model.scene import Scene, load_scene, save_scene  # noqa: E402
from desktwin.model.urdf import export_urdf  # noqa: E402
from desktwin.percept.camera import scene_camera  # noqa: E402
from desktwin.percept.cloud import AFFORDANCE_POINTS, downsample  # noqa: E402
from desktwin.percept.ply import read_ply, write_ply  # noqa: E402
from desktwin.percept.render import dump_hit_ids, render_frame  # noqa: E402
from desktwin.planner.config import PlanContext  # noqa: E402
from desktwin.planner.mpc import mpc_execute  # noqa: E402
from desktwin.planner.tools import TOOL_BUILDERS, attach_tool, load_tool  # noqa: E402
from desktwin.shared.error_handling import (  # noqa: E402
    DeskTwinError,
    PerceptionError,
    ValidationError,
    format_error_for_display,
)
from desktwin.shared.observability import StructuredLogger, TraceWriter  # noqa: E402
from desktwin.sim.simulator import SimState  # noqa: E402
from desktwin.twin.builder import SignConvention, estimate_twin, load_twin, save_twin  # noqa: E402

logger = logging.getLogger("desktwin")

# Sample population for tool use; a tool makes good action sequences rarer.
TOOL_POPULATION = 600

Handler = Callable[[argparse.Namespace, ConfigBundle, IO[str]], int]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desktwin",
        description="Manipulate articulated desk objects through a reconstructed digital twin",
    )
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="JSON or YAML file overriding icem, reward, noise, camera, affordance, twin, bench",
    )
    parser.add_argument(
        "--full-budget",
        "--paper-config",
        dest="full_budget",
        action="store_true",
        help="Use the full optimizer budget (N = 300, three iterations) instead of the desk one",
    )
    parser.add_argument(
        "--unclamped-rtarget",
        action="store_true",
        help="Do not clamp the target-progress ratio to [0, 1]",
    )
    parser.add_argument(
        "--trace",
        type=Path,
        default=None,
        help="Write per-step JSON lines (t, action, belief s, real s, reward terms) to this file",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging threshold for stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="Run benchmark episodes and write a report")
    bench.add_argument(
        "--category",
        action="append",
        choices=[item.value for item in Category],
        help="Category to run; repeat for several (default: all configured)",
    )
    bench.add_argument("-n", "--episodes", type=int, default=None, help="Episodes per category")
    bench.add_argument("--seed", type=int, default=None, help="Master seed")
    bench.add_argument("--workers", type=int, default=None, help="Concurrent episodes")
    bench.add_argument("--out", type=Path, required=True, help="Report directory")

    ablate = sub.add_parser("ablate", help="Run the five ablation tasks under one mode")
    ablate.add_argument("--mode", required=True, choices=[item.value for item in AblationMode])
    ablate.add_argument("--seed", type=int, default=0)

    episode = sub.add_parser("episode", help="Run one episode on a ground-truth scene")
    _add_scene_source(episode)
    episode.add_argument("--target", type=float, required=True, help="Target displacement")
    episode.add_argument("--seed", type=int, default=0)
    _add_tool_option(episode)
    episode.add_argument(
        "--oracle-twin",
        action="store_true",
        help="Plan on the ground-truth object instead of a reconstruction",
    )

    generate = sub.add_parser("generate", help="Write a generated scene file")
    generate.add_argument(
        "--category",
        required=True,
        choices=[item.value for item in Category] + ["tool-reach-drawer"],
    )
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--out", type=Path, required=True)

    render = sub.add_parser("render", help="Render a scene to an ASCII PLY point cloud")
    _add_scene_source(render)
    render.add_argument("--camera-seed", type=int, default=0)
    render.add_argument("--state", type=float, default=None, help="Joint value (default: scene)")
    render.add_argument("--noise-seed", type=int, default=0)
    render.add_argument("--out", type=Path, required=True)
    render.add_argument("--hit-ids", type=Path, default=None, help="Hit-id map JSON output")

    afford = sub.add_parser("afford", help="Rank push proposals on a rendered view")
    _add_scene_source(afford)
    afford.add_argument("--camera-seed", type=int, default=0)
    afford.add_argument("--seed", type=int, default=0)
    afford.add_argument("--out", type=Path, default=None, help="JSON output (default: stdout)")

    estimate = sub.add_parser("estimate", help="Reconstruct a twin from two point clouds")
    estimate.add_argument("--before", type=Path, required=True)
    estimate.add_argument("--after", type=Path, required=True)
    estimate.add_argument("--out", type=Path, required=True, help="twin.json output")
    estimate.add_argument("--urdf", type=Path, default=None, help="Also export URDF")
    estimate.add_argument(
        "--convention",
        choices=[item.value for item in SignConvention],
        default=None,
        help="Axis sign convention (default: by category, away-from-base otherwise)",
    )
    estimate.add_argument("--category", default="")

    plan = sub.add_parser("plan", help="Plan on a twin and execute on a world scene")
    plan.add_argument("--twin", type=Path, required=True)
    plan.add_argument("--world", type=Path, required=True)
    plan.add_argument("--target", type=float, required=True, help="Target displacement")
    plan.add_argument("--seed", type=int, default=0)
    _add_tool_option(plan)
    return parser


def _add_scene_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--scene", type=Path, help="Scene file (JSON or YAML)")
    group.add_argument(
        "--category",
        choices=[item.value for item in Category],
        help="Generate the scene instead; uses --scene-seed",
    )
    parser.add_argument("--scene-seed", type=int, default=0)


def _add_tool_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--tool",
        default=None,
        help=f"Tool file, or one of {sorted(TOOL_BUILDERS)}",
    )


# ============================================================================
# Helpers
# ============================================================================

def _scene(args: argparse.Namespace) -> Scene:
    if args.scene is not None:
        return load_scene(args.scene)
    return generate_scene(args.category, args.scene_seed)


def _tool(choice: str | None) -> ToolAttachment | None:
    if choice is None:
        return None
    if choice in TOOL_BUILDERS:
        return TOOL_BUILDERS[choice]()
    return load_tool(Path(choice))


def _tool_bundle(bundle: ConfigBundle, tool: ToolAttachment | None) -> ConfigBundle:
    if tool is None or bundle.icem.population >= TOOL_POPULATION:
        return bundle
    return replace(bundle, icem=replace(bundle.icem, population=TOOL_POPULATION))


@contextlib.contextmanager
def _trace(path: Path | None) -> Iterator[StructuredLogger | None]:
    if path is None:
        yield None
        return
    with TraceWriter.open(path) as writer:
        yield writer


def _write_json(payload: Dict[str, Any], out: Path | None, stdout: IO[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")


# ============================================================================
# Commands
# ============================================================================

def _run_bench(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    bench = bundle.bench
    updates = {
        key: value
        for key, value in (
            ("episodes", args.episodes),
            ("seed", args.seed),
            ("workers", args.workers),
        )
        if value is not None
    }
    if updates:
        bundle = replace(bundle, bench=replace(bench, **updates))
    categories = args.category or list(bundle.bench.categories)
    all_stats = []
    all_results = []
    for category in categories:
        stats, results = run_benchmark(category, bundle=bundle)
        all_stats.append(stats)
        all_results.extend(results)
    emit_report(all_stats, all_results, args.out)
    stdout.write(format_table(all_stats))
    return 0


def _run_ablate(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    outcome = run_ablation(args.mode, bundle, args.seed)
    _write_json(outcome.to_dict(), None, stdout)
    return 0


def _run_episode(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    scene = _scene(args)
    tool = _tool(args.tool)
    bundle = _tool_bundle(bundle, tool)
    if args.oracle_twin:
        bundle = replace(bundle, bench=replace(bundle.bench, oracle_twin=True))
    with _trace(args.trace) as trace:
        result = run_episode(scene, args.target, bundle, args.seed, tool=tool, trace=trace)
    payload = result.to_row()
    payload["timings"] = result.timings
    if result.error is not None:
        payload["error"] = result.error
    _write_json(payload, None, stdout)
    return 0


def _run_generate(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    if args.category == "tool-reach-drawer":
        scene = tool_reach_drawer_scene(args.seed)
    else:
        scene = generate_scene(args.category, args.seed)
    save_scene(scene, args.out)
    stdout.write(f"{args.out}\n")
    return 0


def _run_render(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    scene = bundle.camera.apply(_scene(args), bundle.noise)
    s = scene.object.state if args.state is None else args.state
    camera = scene_camera(scene, args.camera_seed, s=s)
    frame = render_frame(scene, s, camera, replace(bundle.noise, seed=args.noise_seed))
    if frame.cloud is None:
        raise PerceptionError("camera sees no geometry", context={"camera": camera.to_dict()})
    write_ply(frame.cloud, args.out)
    if args.hit_ids is not None:
        dump_hit_ids(frame, args.hit_ids)
    stdout.write(f"{args.out}: {len(frame.cloud)} points\n")
    return 0


def _run_afford(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    scene = bundle.camera.apply(_scene(args), bundle.noise)
    aff = bundle.affordance
    primitive = PRIMITIVES.get(scene.category, PRIMITIVES[Category.DRAWER.value])
    camera = scene_camera(scene, args.camera_seed)
    frame = render_frame(scene, scene.object.state, camera, replace(bundle.noise, seed=args.seed))
    if frame.cloud is None:
        raise PerceptionError("camera sees no geometry", context={"camera": camera.to_dict()})
    cloud = downsample(frame.cloud, AFFORDANCE_POINTS, args.seed)
    scored = score_points(cloud, scene, primitive, seed=args.seed, config=aff)
    ranked = []
    for point in top_points(scored, aff.n_p):
        proposals = propose_actions(point, primitive, aff.n_a, world=scene, config=aff)
        ranked.append(
            {
                "index": point.index,
                "point": point.point.tolist(),
                "normal": point.normal.tolist(),
                "actionability": point.actionability,
                "proposals": [item.to_dict() for item in proposals],
            }
        )
    payload = {
        "scene": scene.scene_id,
        "primitive": primitive.value,
        "camera": camera.to_dict(),
        "scored_points": len(scored),
        "points": ranked,
    }
    _write_json(payload, args.out, stdout)
    return 0


def _run_estimate(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    convention = (
        SignConvention(args.convention)
        if args.convention is not None
        else CONVENTIONS.get(args.category, SignConvention.AWAY_FROM_BASE)
    )
    cloud0 = read_ply(args.before)
    cloud1 = read_ply(args.after)
    twin = estimate_twin(
        cloud0,
        cloud1,
        config=bundle.twin_config(),
        convention=convention,
        name=args.out.stem,
        category=args.category,
    )
    save_twin(twin, args.out)
    if args.urdf is not None:
        export_urdf(twin.object, args.urdf)
    flag = " (low confidence)" if twin.low_confidence else ""
    stdout.write(
        f"{args.out}: {twin.kind.value} joint, observed displacement "
        f"{twin.observed_displacement:.4f}{flag}\n"
    )
    return 0


def _run_plan(args: argparse.Namespace, bundle: ConfigBundle, stdout: IO[str]) -> int:
    twin = load_twin(args.twin)
    world = load_scene(args.world)
    joint = world.object.joint
    if not joint.contains(joint.state + args.target):
        raise ValidationError(
            f"target displacement {args.target} leaves the world joint limits",
            field_path="plan.target",
            invalid_value=args.target,
        )
    tool = _tool(args.tool)
    bundle = _tool_bundle(bundle, tool)
    robot = world.robot if tool is None else attach_tool(world.robot, tool)
    real_world = world.with_robot(robot)
    twin_scene = Scene(
        object=twin.object,
        robot=robot,
        q0=world.q0,
        table_height=world.table_height,
        scene_id=f"{world.scene_id}-plan",
        category=world.category,
    )
    ctx = PlanContext(twin.s1, twin.s1 + args.target, tool_attached=tool is not None)
    with _trace(args.trace) as trace:
        trajectory = mpc_execute(
            twin_scene,
            real_world,
            SimState(q=world.q0, s=twin.s1),
            SimState(q=world.q0, s=joint.state),
            ctx,
            bundle.icem,
            bundle.reward,
            args.seed,
            trace=trace,
        )
    payload = {
        "success": trajectory.success,
        "steps": trajectory.steps,
        "belief_displacement": trajectory.final_belief.s - twin.s1,
        "real_displacement": trajectory.real_displacement,
        "target": args.target,
        "unexpected_collisions": trajectory.unexpected_collisions,
        "actions": trajectory.actions.tolist(),
    }
    _write_json(payload, None, stdout)
    return 0


COMMANDS: Dict[str, Handler] = {
    "bench": _run_bench,
    "ablate": _run_ablate,
    "episode": _run_episode,
    "generate": _run_generate,
    "render": _run_render,
    "afford": _run_afford,
    "estimate": _run_estimate,
    "plan": _run_plan,
}


def main(
    argv: Sequence[str] | None = None,
    *,
    stdout: IO[str] | None = None,
    stderr: IO[str] | None = None,
) -> int:
    """Parse CLI arguments and dispatch to the selected command.

    Completed runs exit with 0 whether or not the task succeeded; invalid
    inputs and pipeline errors exit with 1.
    """

    out_stream = stdout or sys.stdout
    err_stream = stderr or sys.stderr
    parser = _build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=err_stream,
    )

    try:
        bundle = load_config(args.config, full_budget=args.full_budget)
        if args.unclamped_rtarget:
            bundle = replace(bundle, reward=replace(bundle.reward, clamp_target=False))
        return COMMANDS[args.command](args, bundle, out_stream)
    except DeskTwinError as exc:
        exc.log(logger)
        err_stream.write(f"{format_error_for_display(exc)}\n")
        return 1
    except OSError as exc:
        err_stream.write(f"{format_error_for_display(exc)}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
