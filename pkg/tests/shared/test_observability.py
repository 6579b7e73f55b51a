from __future__ import annotations

import json
from enum import Enum
from pathlib import Path

import numpy as np

from desktwin.shared.observability import MetricsCollector, StructuredLogger, TraceWriter


class _Flag(str, Enum):
    FREE = "free"


def test_structured_logger_serializes_arrays_and_enums() -> None:
    logger = StructuredLogger(default_context={"episode": 3})

    line = logger.log("step", q=np.array([0.5, -0.25]), contact=_Flag.FREE, t=np.int64(2))

    assert json.loads(line) == {
        "contact": "free",
        "episode": 3,
        "event": "step",
        "q": [0.5, -0.25],
        "t": 2,
    }
    assert len(logger) == 1
    assert logger.export()[0]["event"] == "step"


def test_trace_writer_writes_json_lines(tmp_path: Path) -> None:
    path = tmp_path / "trace" / "run.jsonl"

    with TraceWriter.open(path) as writer:
        writer.log("step", t=0, reward={"total": -1.5})
        writer.log("step", t=1, reward={"total": -1.0})

    lines = path.read_text().splitlines()
    assert [json.loads(line)["t"] for line in lines] == [0, 1]
    assert "timestamp" not in lines[0]


def test_metrics_collector_counts_and_times() -> None:
    metrics = MetricsCollector()

    metrics.increment("rollouts", 100)
    metrics.increment("rollouts", 50)
    with metrics.time("plan"):
        pass
    with metrics.time("plan"):
        pass

    snapshot = metrics.snapshot()
    assert snapshot["counters"] == {"rollouts": 150.0}
    assert snapshot["timers"]["plan"]["count"] == 2
    assert snapshot["timers"]["plan"]["total"] >= 0.0
