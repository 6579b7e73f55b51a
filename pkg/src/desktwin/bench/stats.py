"""Per-category accuracy statistics and the benchmark loop."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Sequence

from ..config import ConfigBundle
from ..shared.error_handling import ErrorContext
from .episode import EpisodeResult, run_episode, sample_target
from .generators import Category, generate_scene

logger = logging.getLogger(__name__)

THRESHOLDS = (10.0, 30.0, 50.0)


@dataclass(frozen=True)
class CategoryStats:
    """Accuracy summary of one category.

    The three counts are episodes with ``|delta_r|`` strictly below 10, 30
    and 50 percent, so they never decrease from left to right.
    """

    category: str
    n: int
    below_10: int
    below_30: int
    below_50: int
    mean_abs_delta: float
    mean_abs_delta_r: float
    successes: int = 0

    @classmethod
    def from_results(cls, category: str, results: Sequence[EpisodeResult]) -> "CategoryStats":
        n = len(results)
        if n == 0:
            return cls(category, 0, 0, 0, 0, 0.0, 0.0, 0)
        errors = [abs(item.delta_r) for item in results]
        counts = [sum(1 for value in errors if value < threshold) for threshold in THRESHOLDS]
        return cls(
            category=category,
            n=n,
            below_10=counts[0],
            below_30=counts[1],
            below_50=counts[2],
            mean_abs_delta=sum(abs(item.delta) for item in results) / n,
            mean_abs_delta_r=sum(errors) / n,
            successes=sum(1 for item in results if item.success),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "category": self.category,
            "n": self.n,
            "below_10": self.below_10,
            "below_30": self.below_30,
            "below_50": self.below_50,
            "mean_abs_delta": self.mean_abs_delta,
            "mean_abs_delta_r": self.mean_abs_delta_r,
            "successes": self.successes,
        }


def benchmark_episode(category: Category | str, index: int, bundle: ConfigBundle) -> EpisodeResult:
    """Episode ``index`` of a category run; targets alternate direction."""

    seed = bundle.bench.seed + index
    scene = generate_scene(category, seed)
    sign = 1.0 if index % 2 == 0 else -1.0
    delta = sample_target(scene, bundle.bench, seed, sign=sign)
    with ErrorContext(f"episode {scene.scene_id}"):
        return run_episode(scene, delta, bundle, seed)


def run_benchmark(
    category: Category | str,
    n: int | None = None,
    bundle: ConfigBundle | None = None,
    seeds: Sequence[int] | None = None,
) -> tuple[CategoryStats, list[EpisodeResult]]:
    """Run ``n`` episodes of ``category`` and aggregate them.

    ``seeds`` overrides the episode indices; results are returned in index
    order whatever the worker count.
    """

    bundle = bundle or ConfigBundle.desk()
    category = Category(category).value
    count = bundle.bench.episodes if n is None else n
    indices = list(seeds) if seeds is not None else list(range(count))
    logger.info("Benchmark %s: %d episodes", category, len(indices))

    def run(index: int) -> EpisodeResult:
        return benchmark_episode(category, index, bundle)

    workers = bundle.bench.workers
    if workers > 1 and len(indices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(index) for index in indices]
    stats = CategoryStats.from_results(category, results)
    logger.info(
        "Benchmark %s: %d/%d below 30%%, mean |delta_r| %.2f%%",
        category,
        stats.below_30,
        stats.n,
        stats.mean_abs_delta_r,
    )
    return stats, results
