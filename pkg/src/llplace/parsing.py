"""Extraction and validation of delimiter-wrapped JSON design output.

The model reports placements between block delimiters ([Task Output],
[Added Output], [Deleted Output]). Extraction takes the text between the
LAST opening delimiter and the single closing delimiter, so an echoed
in-context example (which uses distinct [Example ...] delimiter names)
can never be matched. Parsing is strict JSON after one repair pass that
strips markdown code fences and surrounding whitespace.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from ._fmt import fmt_num
from .errors import (
    CountMismatch,
    MalformedJson,
    MissingDelimiter,
    MissingField,
    MultipleOutputBlocks,
    UnknownObject,
    UnterminatedBlock,
)
from .geometry import BBoxDims, Point3, PlacedObject, RoomBounds, SceneLayout, normalize_yaw


class OutputBlockKind(Enum):
    TASK_OUTPUT = ("[Task Output]", "[/Task Output]")
    ADDED_OUTPUT = ("[Added Output]", "[/Added Output]")
    DELETED_OUTPUT = ("[Deleted Output]", "[/Deleted Output]")

    @property
    def open_token(self) -> str:
        return self.value[0]

    @property
    def close_token(self) -> str:
        return self.value[1]


@dataclass(frozen=True)
class PlacementRecord:
    """One parsed placement: instance name, centroid, and yaw in [0, 360)."""

    name: str
    center: Point3
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))


def extract_block(text: str, kind: OutputBlockKind) -> str:
    """Text strictly between the last opening delimiter and the single closer."""
    close_count = text.count(kind.close_token)
    if close_count == 0:
        if kind.open_token in text:
            raise UnterminatedBlock(f"{kind.open_token} has no matching {kind.close_token}")
        raise MissingDelimiter(f"no {kind.open_token} block in text")
    if close_count > 1:
        raise MultipleOutputBlocks(
            f"{close_count} {kind.close_token} delimiters found, expected exactly one"
        )
    close_at = text.index(kind.close_token)
    open_at = text.rfind(kind.open_token, 0, close_at)
    if open_at < 0:
        raise MissingDelimiter(f"no {kind.open_token} before {kind.close_token}")
    return text[open_at + len(kind.open_token):close_at]


def extract_input_block(text: str, open_token: str, close_token: str) -> str:
    """Same last-open/first-close rule for instruction-side blocks."""
    close_at = text.find(close_token)
    if close_at < 0:
        raise MissingDelimiter(f"no {close_token} in text")
    open_at = text.rfind(open_token, 0, close_at)
    if open_at < 0:
        raise MissingDelimiter(f"no {open_token} before {close_token}")
    return text[open_at + len(open_token):close_at]


def _strip_fences(text: str) -> str:
    t = text.strip()
    if t.startswith("```"):
        first_newline = t.find("\n")
        t = t[first_newline + 1:] if first_newline >= 0 else ""
        if t.rstrip().endswith("```"):
            t = t.rstrip()[:-3]
    return t.strip()


def _reject_constant(name: str):
    raise MalformedJson(f"non-finite JSON constant {name!r}")


def _load_json(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    except RecursionError as exc:  # pathologically nested input
        raise MalformedJson("JSON nesting too deep") from exc


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MalformedJson(f"{context} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise MalformedJson(f"{context} must be finite, got {value!r}")
    return float(value)


def _single_element(record: dict, key: str, name: str) -> dict:
    value = record[key]
    if not isinstance(value, list) or len(value) != 1 or not isinstance(value[0], dict):
        raise MalformedJson(f"{key!r} of {name!r} must be an array of exactly one object")
    return value[0]


def _parse_record(record) -> PlacementRecord:
    if not isinstance(record, dict):
        raise MalformedJson(f"placement record must be an object, got {type(record).__name__}")
    if "object" not in record:
        raise MissingField("record is missing the 'object' field")
    name = record["object"]
    if not isinstance(name, str) or not name:
        raise MalformedJson(f"'object' must be a non-empty string, got {name!r}")
    if "coordinates" not in record:
        raise MissingField(f"{name!r} is missing the 'coordinates' field")
    coords = _single_element(record, "coordinates", name)
    for axis in ("x", "y", "z"):
        if axis not in coords:
            raise MissingField(f"{name!r} coordinates are missing {axis!r}")
    rotate_key = "rotate" if "rotate" in record else "angle" if "angle" in record else None
    if rotate_key is None:
        raise MissingField(f"{name!r} is missing the 'rotate' field")
    rotate = _single_element(record, rotate_key, name)
    if "angle" not in rotate:
        raise MissingField(f"{name!r} rotation is missing 'angle'")
    return PlacementRecord(
        name=name,
        center=Point3(
            _number(coords["x"], f"{name}.x"),
            _number(coords["y"], f"{name}.y"),
            _number(coords["z"], f"{name}.z"),
        ),
        yaw=_number(rotate["angle"], f"{name}.angle"),
    )


def parse_layout_block(inner: str, expected_names: Iterable[str]) -> list[PlacementRecord]:
    """Parse block content against the exact expected instance-name set."""
    expected = set(expected_names)
    if not expected:
        raise ValueError("expected_names must be non-empty")
    data = _load_json(_strip_fences(inner))
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise MalformedJson(f"block must hold a record or array, got {type(data).__name__}")
    records = [_parse_record(entry) for entry in data]
    seen: set[str] = set()
    for rec in records:
        if rec.name not in expected:
            raise UnknownObject(f"unexpected object {rec.name!r}")
        if rec.name in seen:
            raise CountMismatch(f"object {rec.name!r} appears more than once")
        seen.add(rec.name)
    missing = sorted(expected - seen)
    if missing:
        raise CountMismatch(f"missing objects: {', '.join(missing)}")
    return records


def parse_output(text: str, kind: OutputBlockKind,
                 expected_names: Iterable[str]) -> list[PlacementRecord]:
    return parse_layout_block(extract_block(text, kind), expected_names)


def serialize_placement(record: PlacementRecord) -> str:
    c = record.center
    return (
        f'{{"object": "{record.name}", '
        f'"coordinates": [{{"x": {fmt_num(c.x)}, "y": {fmt_num(c.y)}, "z": {fmt_num(c.z)}}}], '
        f'"rotate": [{{"angle": {fmt_num(record.yaw)}}}]}}'
    )


def serialize_layout(placements: Sequence[PlacementRecord],
                     kind: OutputBlockKind = OutputBlockKind.TASK_OUTPUT) -> str:
    """Delimited output block with two-decimal numerics; inverse of parse_output."""
    names = [p.name for p in placements]
    if len(names) != len(set(names)):
        raise ValueError("placement names must be pairwise distinct")
    body = "[" + ", ".join(serialize_placement(p) for p in placements) + "]"
    return f"{kind.open_token}{body}{kind.close_token}"


def placements_of(layout: SceneLayout) -> list[PlacementRecord]:
    return [PlacementRecord(o.name, o.center, o.yaw) for o in layout.objects]


def apply_placements(
    instances: Sequence[tuple[str, object]],
    placements: Sequence[PlacementRecord],
    room_type: str,
    bounds: RoomBounds,
) -> SceneLayout:
    """Join retrieved bbox dims with parsed centers/yaw, preserving request order.

    Each instance pairs a name with anything exposing `dims` (and optionally
    `category`), normally an AssetRecord or a prior PlacedObject.
    """
    by_name = {p.name: p for p in placements}
    expected = {name for name, _ in instances}
    if expected != set(by_name) or len(instances) != len(placements):
        missing = sorted(expected - set(by_name))
        extra = sorted(set(by_name) - expected)
        raise CountMismatch(
            f"instance/placement name sets differ (missing: {missing}, extra: {extra})"
        )
    objects = []
    for name, source in instances:
        placement = by_name[name]
        dims: BBoxDims = source.dims
        category = getattr(source, "category", "")
        objects.append(
            PlacedObject(name=name, category=category, dims=dims,
                         center=placement.center, yaw=placement.yaw)
        )
    return SceneLayout(room_type, bounds, tuple(objects))
