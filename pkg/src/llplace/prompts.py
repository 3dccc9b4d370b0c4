"""Instruction construction: generation, add/remove editing, and judge prompts.

Templates are plain text files with {{slot}} placeholders, listed by a
manifest. Rendering is literal string substitution so output is
byte-deterministic; golden-file tests pin the text outside the slots.
The turn-end token is carried as template data for the dataset builder;
rendering itself never appends it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ._fmt import fmt_num
from .catalog import AssetRecord, RequestItem
from .geometry import BBoxDims

GENERATION_RULE_EDGE = "I prefer objects to be placed at the edge"
GENERATION_RULE_CHAIR = "Chairs must be placed near to the table/desk"

TASK_ROOM_OPEN = "[Task Room Type]"
TASK_ROOM_CLOSE = "[/Task Room Type]"
TASK_OBJECTS_OPEN = "[Task Objects & Bounding Box Size]"
TASK_OBJECTS_CLOSE = "[/Task Objects & Bounding Box Size]"
ADD_OBJECTS_OPEN = "[Add Objects]"
ADD_OBJECTS_CLOSE = "[/Add Objects]"
DELETE_OBJECTS_OPEN = "[Delete Objects]"
DELETE_OBJECTS_CLOSE = "[/Delete Objects]"


class EditKind(str, Enum):
    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class EditRequest:
    """One editing turn: objects to add (retrieved) or descriptions to remove."""

    kind: EditKind
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("edit request must contain at least one item")


@dataclass(frozen=True)
class PromptTemplates:
    generation_template: str
    add_template: str
    remove_template: str
    judge_template: str
    fixed_example: str
    turn_end_token: str = "<|eot_id|>"

    @classmethod
    def load(cls, directory: Path) -> "PromptTemplates":
        directory = Path(directory)
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
        read = lambda key: (directory / manifest[key]).read_text(encoding="utf-8")
        return cls(
            generation_template=read("generation"),
            add_template=read("add"),
            remove_template=read("remove"),
            judge_template=read("judge"),
            fixed_example=read("fixed_example"),
            turn_end_token=manifest.get("turn_end_token", "<|eot_id|>"),
        )


def default_templates() -> PromptTemplates:
    return PromptTemplates.load(Path(str(resources.files("llplace") / "templates")))


def _fill(template: str, **slots: str) -> str:
    text = template
    for key, value in slots.items():
        text = text.replace("{{" + key + "}}", value)
    return text


def _dims_of(item) -> BBoxDims:
    return item.dims if isinstance(item, AssetRecord) else item


def format_dims_json(pairs: Iterable[tuple[str, AssetRecord | BBoxDims]]) -> str:
    """Instance-name to bbox mapping with two-decimal values, order preserved."""
    parts = []
    for name, item in pairs:
        dims = _dims_of(item)
        parts.append(
            f'"{name}": {{"h": {fmt_num(dims.h)}, "w": {fmt_num(dims.w)}, "d": {fmt_num(dims.d)}}}'
        )
    return "{" + ", ".join(parts) + "}"


def render_generation_prompt(request, retrieved: Sequence[tuple[str, AssetRecord | BBoxDims]],
                             templates: PromptTemplates) -> str:
    """Full design instruction: rules, fixed example, room type, and objects JSON."""
    if not retrieved:
        raise ValueError("cannot render a generation prompt with no retrieved objects")
    return _fill(
        templates.generation_template,
        fixed_example=templates.fixed_example.rstrip("\n"),
        room_type=request.room_type,
        objects_json=format_dims_json(retrieved),
    )


def render_add_prompt(additions: Sequence[tuple[str, AssetRecord | BBoxDims]],
                      templates: PromptTemplates) -> str:
    if not additions:
        raise ValueError("cannot render an add prompt with no additions")
    return _fill(templates.add_template, additions_json=format_dims_json(additions))


def render_remove_prompt(removals: Sequence[RequestItem],
                         templates: PromptTemplates) -> str:
    """Removal instruction; targets are plain-language descriptions, one per instance."""
    if not removals:
        raise ValueError("cannot render a remove prompt with no removals")
    descriptions: list[str] = []
    for item in removals:
        descriptions.extend([item.description] * item.quantity)
    return _fill(templates.remove_template, deletions_json=json.dumps(descriptions))


def render_judge_prompt(preferences: str, templates: PromptTemplates) -> str:
    return _fill(templates.judge_template, preferences=preferences)
