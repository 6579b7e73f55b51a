"""Benchmark artifacts: per-episode CSV, statistics JSON and a text table."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Sequence

from .episode import RESULT_COLUMNS, EpisodeResult
from .generators import Category
from .stats import CategoryStats

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
STATS_FILE = "stats.json"
TABLE_FILE = "table.txt"

TABLE_ROWS = (
    "Number of manipulations",
    "|delta_r| < 10%",
    "|delta_r| < 30%",
    "|delta_r| < 50%",
    "Avg |delta|",
    "Avg |delta_r|",
)


def _mean_delta_label(stats: CategoryStats) -> str:
    if stats.category == Category.DRAWER.value:
        return f"{stats.mean_abs_delta * 100.0:.2f}cm"
    return f"{math.degrees(stats.mean_abs_delta):.2f}deg"


def format_table(stats: Sequence[CategoryStats]) -> str:
    """Accuracy table with one column per category."""

    columns = [
        [
            str(item.n),
            str(item.below_10),
            str(item.below_30),
            str(item.below_50),
            _mean_delta_label(item),
            f"{item.mean_abs_delta_r:.2f}%",
        ]
        for item in stats
    ]
    header = ["Category"] + [item.category.capitalize() for item in stats]
    rows = [header] + [
        [label] + [column[index] for column in columns] for index, label in enumerate(TABLE_ROWS)
    ]
    widths = [max(len(row[position]) for row in rows) for position in range(len(header))]
    lines = []
    for number, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [
            cell.rjust(width) for cell, width in zip(row[1:], widths[1:])
        ]
        lines.append(" | ".join(cells).rstrip())
        if number == 0:
            lines.append("-+-".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def results_csv(results: Sequence[EpisodeResult]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(RESULT_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for item in results:
        writer.writerow({key: _csv_value(value) for key, value in item.to_row().items()})
    return buffer.getvalue()


def _csv_value(value: object) -> object:
    if isinstance(value, float):
        return repr(value)
    return value


def emit_report(
    stats: Sequence[CategoryStats], results: Sequence[EpisodeResult], out_dir: Path
) -> list[Path]:
    """Write the three report files into ``out_dir``; output bytes depend only on the inputs."""

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / RESULTS_FILE, out_dir / STATS_FILE, out_dir / TABLE_FILE]
    paths[0].write_text(results_csv(results), encoding="utf-8")
    payload = {"categories": [item.to_dict() for item in stats]}
    paths[1].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths[2].write_text(format_table(stats), encoding="utf-8")
    logger.info("Wrote report for %d episodes to %s", len(results), out_dir)
    return paths
