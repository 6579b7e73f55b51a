"""Loading of JSON/YAML documents and typed overrides for frozen dataclasses."""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any, Dict, Mapping, TypeVar

import yaml

from .error_handling import ConfigurationError, SceneFormatError

T = TypeVar("T")

YAML_SUFFIXES = {".yaml", ".yml"}


def read_document(path: Path, *, error_cls: type[Exception] = SceneFormatError) -> Dict[str, Any]:
    """Deserialize the JSON or YAML document at ``path`` into a mapping.

    ``.json`` files are parsed strictly as JSON and ``.yaml``/``.yml`` as YAML;
    any other suffix is tried as JSON first, then YAML.
    """

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise error_cls(f"File not found: {path}") from exc
    suffix = path.suffix.lower()

    if suffix in YAML_SUFFIXES:
        data = _load_yaml(text, path, error_cls)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            if suffix == ".json":
                raise error_cls(f"Invalid JSON ({path.name}): {exc.msg}") from exc
            data = _load_yaml(text, path, error_cls)

    if not isinstance(data, dict):
        raise error_cls(f"Document root must be a mapping, got {type(data).__name__}")
    return data


def _load_yaml(text: str, path: Path, error_cls: type[Exception]) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise error_cls(f"Invalid YAML ({path.name}): {exc}") from exc


def apply_overrides(instance: T, overrides: Mapping[str, Any], *, section: str) -> T:
    """Return ``instance`` with ``overrides`` applied via ``dataclasses.replace``.

    Unknown keys and values rejected by ``__post_init__`` raise
    ``ConfigurationError`` naming the dotted key.
    """

    if not isinstance(overrides, Mapping):
        raise ConfigurationError(f"Section '{section}' must be a mapping")
    known = {item.name: item for item in dataclasses.fields(instance)}  # type: ignore[arg-type]
    updates: Dict[str, Any] = {}
    for key, value in overrides.items():
        if key not in known:
            raise ConfigurationError(
                f"Unknown configuration key '{section}.{key}'",
                context={"key": f"{section}.{key}"},
            )
        current = getattr(instance, key)
        if isinstance(current, tuple) and isinstance(value, list):
            value = tuple(value)
        elif isinstance(current, float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        updates[key] = value
    try:
        return dataclasses.replace(instance, **updates)  # type: ignore[type-var]
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"Invalid value in section '{section}': {exc}", cause=exc) from exc
