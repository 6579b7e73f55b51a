"""Benchmark harness: scene generators, episodes, statistics and reports."""

from ..config import BenchConfig
from .ablation import (
    ABLATION_TASKS,
    AblationMode,
    AblationResult,
    AblationTask,
    ablated_bundle,
    run_ablation,
)
from .episode import (
    RESULT_COLUMNS,
    EpisodeResult,
    axis_error_deg,
    pivot_error,
    run_episode,
    sample_target,
)
from .generators import (
    Category,
    DimensionRanges,
    axis_jitter,
    drawer_object,
    drawer_scene,
    faucet_object,
    faucet_scene,
    generate_scene,
    laptop_object,
    laptop_scene,
    tool_reach_drawer_scene,
)
from .report import emit_report, format_table, results_csv
from .stats import CategoryStats, benchmark_episode, run_benchmark

__all__ = [
    "ABLATION_TASKS",
    "AblationMode",
    "AblationResult",
    "AblationTask",
    "BenchConfig",
    "Category",
    "CategoryStats",
    "DimensionRanges",
    "EpisodeResult",
    "RESULT_COLUMNS",
    "ablated_bundle",
    "axis_error_deg",
    "axis_jitter",
    "benchmark_episode",
    "drawer_object",
    "drawer_scene",
    "emit_report",
    "faucet_object",
    "faucet_scene",
    "format_table",
    "generate_scene",
    "laptop_object",
    "laptop_scene",
    "pivot_error",
    "results_csv",
    "run_ablation",
    "run_benchmark",
    "run_episode",
    "sample_target",
    "tool_reach_drawer_scene",
]
