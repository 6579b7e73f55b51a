"""ASCII PLY reading and writing for point clouds.

The frame tag and provenance travel as header comments::

    comment frame world
    comment provenance {"camera": {...}, "noise": {...}}

Any other comment line is kept verbatim in ``PointCloud.comments``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..shared.error_handling import PlyFormatError
from .cloud import PointCloud, Provenance

FLOAT_TYPES = {"float", "float32", "double", "float64"}
# Comment prefixes reserved for the frame tag and provenance.
RESERVED_COMMENTS = ("frame ", "provenance ")


def _check_header_text(text: str, what: str) -> None:
    if not text.isascii():
        raise PlyFormatError(f"{what} must be ASCII", context={what: text})
    if "\n" in text or "\r" in text:
        raise PlyFormatError(f"{what} must be a single line", context={what: text})


def write_ply(cloud: PointCloud, path: Path) -> None:
    """Write ``cloud`` as ASCII PLY.

    Raises:
        PlyFormatError: The frame or a comment is not single-line ASCII, the
            frame contains whitespace, or a comment would be read back as the
            frame tag or provenance.
    """

    _check_header_text(cloud.frame, "frame")
    if cloud.frame.split() != [cloud.frame]:
        raise PlyFormatError("frame must be one non-empty word", context={"frame": cloud.frame})
    for text in cloud.comments:
        _check_header_text(text, "comment")
        if text.startswith(RESERVED_COMMENTS):
            raise PlyFormatError(
                f"comment may not start with {text.split(' ', 1)[0]!r}", context={"comment": text}
            )

    lines = ["ply", "format ascii 1.0", f"comment frame {cloud.frame}"]
    if cloud.provenance is not None:
        lines.append(f"comment provenance {json.dumps(cloud.provenance.to_dict(), sort_keys=True)}")
    lines += [f"comment {text}" for text in cloud.comments]
    lines += [
        f"element vertex {len(cloud)}",
        "property double x",
        "property double y",
        "property double z",
        "end_header",
    ]
    lines += [f"{x!r} {y!r} {z!r}" for x, y, z in cloud.points.tolist()]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def read_ply(path: Path) -> PointCloud:
    try:
        lines = Path(path).read_text(encoding="ascii").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise PlyFormatError(f"cannot read PLY {path}: {exc}") from exc
    if not lines or lines[0].strip() != "ply":
        raise PlyFormatError("missing 'ply' magic line", context={"path": str(path)})
    try:
        end = next(index for index, line in enumerate(lines) if line.strip() == "end_header")
    except StopIteration:
        raise PlyFormatError("missing end_header", context={"path": str(path)}) from None

    frame = "world"
    provenance = None
    comments: list[str] = []
    count = None
    properties: list[str] = []
    for line in lines[1:end]:
        tokens = line.split()
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "format":
            if tokens[1:2] != ["ascii"]:
                raise PlyFormatError(f"unsupported PLY format '{line.strip()}'")
        elif keyword == "comment":
            text = line.split(" ", 1)[1] if " " in line.strip() else ""
            if text.startswith("frame "):
                frame = text[len("frame ") :].strip()
            elif text.startswith("provenance "):
                try:
                    provenance = Provenance.from_dict(json.loads(text[len("provenance ") :]))
                except (ValueError, TypeError) as exc:
                    raise PlyFormatError(f"malformed provenance comment: {exc}") from exc
            else:
                comments.append(text)
        elif keyword == "element":
            if len(tokens) != 3 or tokens[1] != "vertex":
                raise PlyFormatError(f"unsupported element '{line.strip()}'")
            try:
                count = int(tokens[2])
            except ValueError:
                raise PlyFormatError(f"vertex count must be an integer: '{line.strip()}'") from None
            if count < 0:
                raise PlyFormatError(f"negative vertex count: '{line.strip()}'")
        elif keyword == "property":
            if len(tokens) != 3 or tokens[1] not in FLOAT_TYPES:
                raise PlyFormatError(f"non-float property '{line.strip()}'")
            properties.append(tokens[2])
        else:
            raise PlyFormatError(f"unexpected header line '{line.strip()}'")

    if count is None:
        raise PlyFormatError("missing vertex element")
    if properties[:3] != ["x", "y", "z"]:
        raise PlyFormatError("first properties must be x, y, z")
    body = [line for line in lines[end + 1 :] if line.strip()]
    if len(body) != count:
        raise PlyFormatError(f"expected {count} vertices, found {len(body)}")
    try:
        values = np.array([[float(token) for token in line.split()] for line in body], dtype=float)
    except ValueError as exc:
        raise PlyFormatError(f"non-numeric vertex data: {exc}") from exc
    if values.ndim != 2 or values.shape[1] != len(properties):
        raise PlyFormatError("vertex rows do not match the declared properties")
    return PointCloud(values[:, :3], frame=frame, provenance=provenance, comments=tuple(comments))
