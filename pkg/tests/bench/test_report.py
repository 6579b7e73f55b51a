from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from desktwin.bench.episode import RESULT_COLUMNS, EpisodeResult
from desktwin.bench.report import emit_report, format_table, results_csv
from desktwin.bench.stats import CategoryStats


def _results() -> list[EpisodeResult]:
    return [
        EpisodeResult("drawer", "drawer-001", 1, 0.05, 0.13, 0.08, 0.075, True, 12),
        EpisodeResult(
            "drawer", "drawer-002", 2, 0.15, 0.09, -0.06, 0.0, False, 0, stage="insufficient-motion"
        ),
    ]


def _stats() -> list[CategoryStats]:
    return [
        CategoryStats.from_results("drawer", _results()),
        CategoryStats.from_results("faucet", []),
    ]


def test_table_has_one_column_per_category() -> None:
    table = format_table(_stats())
    lines = table.splitlines()

    assert lines[0].split("|")[0].strip() == "Category"
    assert "Drawer" in lines[0] and "Faucet" in lines[0]
    assert set(lines[1]) <= {"-", "+"}
    assert lines[2].startswith("Number of manipulations")
    assert "cm" in lines[6]
    assert "0.00deg" in lines[6]
    assert len(lines) == 8


def test_empty_table_keeps_row_labels() -> None:
    lines = format_table([]).splitlines()

    assert lines[0] == "Category"
    assert [line for line in lines[2:]] == [
        "Number of manipulations",
        "|delta_r| < 10%",
        "|delta_r| < 30%",
        "|delta_r| < 50%",
        "Avg |delta|",
        "Avg |delta_r|",
    ]


def test_results_csv_has_header_and_exact_floats() -> None:
    rows = list(csv.DictReader(io.StringIO(results_csv(_results()))))

    assert tuple(rows[0]) == RESULT_COLUMNS
    assert rows[0]["delta_real"] == repr(0.075)
    assert rows[1]["stage"] == "insufficient-motion"
    assert results_csv([]).strip() == ",".join(RESULT_COLUMNS)


def test_report_files_are_byte_identical_for_equal_inputs(tmp_path: Path) -> None:
    first = emit_report(_stats(), _results(), tmp_path / "a")
    second = emit_report(_stats(), _results(), tmp_path / "b")

    assert [path.name for path in first] == ["results.csv", "stats.json", "table.txt"]
    for left, right in zip(first, second):
        assert left.read_bytes() == right.read_bytes()
    payload = json.loads(first[1].read_text(encoding="utf-8"))
    assert [item["category"] for item in payload["categories"]] == ["drawer", "faucet"]
