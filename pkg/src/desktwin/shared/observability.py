"""Structured trace records and stage timers.

``StructuredLogger`` keeps JSON-ready records in memory; ``TraceWriter`` streams
them to a JSON-lines file for the ``--trace`` CLI flag. Trace records carry no
wall-clock fields, so two runs with the same seed produce identical bytes.
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from contextlib import contextmanager
from pathlib import Path
from time import perf_counter
from typing import IO, Any, Dict, Iterator, Mapping

import numpy as np

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


class StructuredLogger:
    """Accumulate structured records with a shared default context."""

    def __init__(self, *, default_context: Mapping[str, Any] | None = None) -> None:
        self._default_context = dict(default_context or {})
        self._records: list[Dict[str, Any]] = []

    def log(self, event: str, **context: Any) -> str:
        record: Dict[str, Any] = {"event": event}
        record.update(self._default_context)
        record.update({key: _jsonable(value) for key, value in context.items()})
        self._records.append(record)
        return json.dumps(record, sort_keys=True)

    def export(self) -> tuple[Dict[str, Any], ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)


class TraceWriter(StructuredLogger):
    """Write every record as one JSON line as soon as it is logged."""

    def __init__(
        self,
        stream: IO[str],
        *,
        default_context: Mapping[str, Any] | None = None,
    ) -> None:
        super().__init__(default_context=default_context)
        self._stream = stream

    @classmethod
    @contextmanager
    def open(cls, path: Path, **kwargs: Any) -> Iterator["TraceWriter"]:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            logger.debug("Writing trace to %s", path)
            yield cls(handle, **kwargs)

    def log(self, event: str, **context: Any) -> str:
        line = super().log(event, **context)
        self._stream.write(line + "\n")
        return line


class MetricsCollector:
    """Collect counters and timer metrics for pipeline stages."""

    def __init__(self) -> None:
        self._counters: defaultdict[str, float] = defaultdict(float)
        self._timers: defaultdict[str, list[float]] = defaultdict(list)

    def increment(self, name: str, amount: float = 1.0) -> None:
        self._counters[name] += amount

    @contextmanager
    def time(self, name: str) -> Iterator[None]:
        start = perf_counter()
        try:
            yield
        finally:
            self._timers[name].append(perf_counter() - start)

    def snapshot(self) -> Dict[str, Any]:
        timers = {
            name: {
                "count": len(samples),
                "total": sum(samples),
                "max": max(samples) if samples else 0.0,
            }
            for name, samples in self._timers.items()
        }
        return {"counters": dict(self._counters), "timers": timers}
