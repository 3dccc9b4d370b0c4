"""Two-turn dialogue training data from scene corpora.

Every scene yields a generation pair (design instruction, placement block).
Scenes with more than four objects additionally donate edit pairs: a random
subset of non-essential objects is dropped with per-object probability 0.4,
the add pair asks to restore them (label = full scene), and the remove pair
asks to delete them (label = corrupted scene). When add pairs are emitted,
the generation pair itself becomes the corrupted scene so the dialogue's
first turn matches the add turn's starting state.

Selection draws one uniform number per object (in stored order) from a
random.Random seeded with "<seed>:<scene_id>", so rebuilding a corpus is
reproducible line for line.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .catalog import DesignRequest, RequestItem
from .geometry import BBoxDims, Point3
from .parsing import OutputBlockKind, PlacementRecord, serialize_layout
from .prompts import PromptTemplates, render_add_prompt, render_generation_prompt, render_remove_prompt

logger = logging.getLogger(__name__)

ESSENTIAL_SUBSTRINGS = ("table", "chair", "sofa", "bed", "lamp")


@dataclass(frozen=True)
class SceneObject:
    name: str
    category: str
    dims: BBoxDims
    center: Point3
    yaw: float


@dataclass(frozen=True)
class SceneRecord:
    scene_id: str
    room_type: str
    objects: tuple[SceneObject, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not self.objects:
            raise ValueError("scene must contain at least one object")
        names = [o.name for o in self.objects]
        if len(names) != len(set(names)):
            raise ValueError("scene object names must be distinct")


class PairKind(str, Enum):
    GENERATION = "generation"
    ADD_EDIT = "add"
    REMOVE_EDIT = "remove"


@dataclass(frozen=True)
class TrainingPair:
    kind: PairKind
    input: str
    label: str
    scene_id: str
    selected: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "scene_id": self.scene_id,
            "input": self.input,
            "label": self.label,
            "selected": list(self.selected),
        }


@dataclass(frozen=True)
class BuilderConfig:
    selection_probability: float = 0.4
    min_objects_for_edit: int = 4
    essential_substrings: tuple[str, ...] = ESSENTIAL_SUBSTRINGS
    seed: int = 0
    turn_end_token: str = "<|eot_id|>"
    emit_add: bool = True
    emit_remove: bool = True

    def __post_init__(self):
        if not 0.0 <= self.selection_probability <= 1.0:
            raise ValueError("selection_probability must be in [0, 1]")


def is_essential(category: str, substrings: Iterable[str] = ESSENTIAL_SUBSTRINGS) -> bool:
    lowered = category.lower()
    return any(s in lowered for s in substrings)


def scene_rng(config: BuilderConfig, scene_id: str) -> random.Random:
    return random.Random(f"{config.seed}:{scene_id}")


def select_editable(objects: Iterable[SceneObject], config: BuilderConfig,
                    rng: random.Random) -> list[str]:
    """Independent per-object selection; essential categories never selected.

    One uniform draw is consumed per object in stored order regardless of
    eligibility, so the draw sequence is position-stable.
    """
    objects = list(objects)
    if len(objects) <= config.min_objects_for_edit:
        return []
    selected = []
    for obj in objects:
        draw = rng.random()
        if is_essential(obj.category, config.essential_substrings):
            continue
        if draw < config.selection_probability:
            selected.append(obj.name)
    return selected


def _placements(objects: Iterable[SceneObject]) -> list[PlacementRecord]:
    return [PlacementRecord(o.name, o.center, o.yaw) for o in objects]


def _generation_input(scene_objects, room_type: str, templates: PromptTemplates,
                      config: BuilderConfig) -> str:
    request = DesignRequest(
        room_type=room_type,
        items=tuple(RequestItem(1, o.name) for o in scene_objects),
    )
    prompt = render_generation_prompt(
        request, [(o.name, o.dims) for o in scene_objects], templates
    )
    return prompt + config.turn_end_token


def build_pairs(scene: SceneRecord, templates: PromptTemplates,
                config: BuilderConfig) -> list[TrainingPair]:
    """Training pairs for one scene: a generation pair plus optional edit pairs."""
    objects = list(scene.objects)
    full_label = serialize_layout(_placements(objects), OutputBlockKind.TASK_OUTPUT)
    full_input = _generation_input(objects, scene.room_type, templates, config)

    selected = select_editable(objects, config, scene_rng(config, scene.scene_id))
    pairs: list[TrainingPair] = []

    if not selected:
        pairs.append(TrainingPair(PairKind.GENERATION, full_input, full_label, scene.scene_id))
        return pairs

    kept = [o for o in objects if o.name not in selected]
    dropped = [o for o in objects if o.name in selected]
    corrupted_label = serialize_layout(_placements(kept), OutputBlockKind.TASK_OUTPUT)
    corrupted_input = _generation_input(kept, scene.room_type, templates, config)

    if config.emit_add:
        # the dialogue's first turn starts from the corrupted scene the add
        # turn completes, so the generation pair is the corrupted one
        pairs.append(
            TrainingPair(PairKind.GENERATION, corrupted_input, corrupted_label, scene.scene_id)
        )
        add_prompt = render_add_prompt([(o.name, o.dims) for o in dropped], templates)
        add_input = f"{corrupted_label}\n\n{add_prompt}{config.turn_end_token}"
        add_label = serialize_layout(_placements(objects), OutputBlockKind.ADDED_OUTPUT)
        pairs.append(
            TrainingPair(PairKind.ADD_EDIT, add_input, add_label, scene.scene_id, tuple(selected))
        )
    else:
        pairs.append(TrainingPair(PairKind.GENERATION, full_input, full_label, scene.scene_id))

    if config.emit_remove:
        removals = [RequestItem(1, o.name.replace("_", " ")) for o in dropped]
        remove_prompt = render_remove_prompt(removals, templates)
        remove_input = f"{full_label}\n\n{remove_prompt}{config.turn_end_token}"
        remove_label = serialize_layout(_placements(kept), OutputBlockKind.DELETED_OUTPUT)
        pairs.append(
            TrainingPair(PairKind.REMOVE_EDIT, remove_input, remove_label,
                         scene.scene_id, tuple(selected))
        )
    return pairs


# --- corpus files ---


def parse_scene_line(line: str) -> SceneRecord:
    data = json.loads(line)
    objects = tuple(
        SceneObject(
            name=str(entry["name"]),
            category=str(entry.get("category", "")),
            dims=BBoxDims(
                float(entry["bbox"]["h"]), float(entry["bbox"]["w"]), float(entry["bbox"]["d"])
            ),
            center=Point3(
                float(entry["coordinates"]["x"]),
                float(entry["coordinates"]["y"]),
                float(entry["coordinates"]["z"]),
            ),
            yaw=float(entry["angle"]),
        )
        for entry in data["objects"]
    )
    return SceneRecord(str(data["scene_id"]), str(data["room_type"]), objects)


def build_corpus(lines: Iterable[str], templates: PromptTemplates,
                 config: BuilderConfig, out_dir: Path) -> dict:
    """Read scene JSONL, write gen/add/remove JSONL plus a stats document.

    Unreadable records are skipped with a logged reason; duplicate scene ids
    keep the first occurrence. Scenes are processed in sorted scene-id order
    so rebuilding with the same seed is byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    scenes: dict[str, SceneRecord] = {}
    skipped = 0
    duplicates = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            scene = parse_scene_line(line)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            logger.warning("skipping scene line %d: %s", lineno, exc)
            skipped += 1
            continue
        if scene.scene_id in scenes:
            logger.warning("skipping duplicate scene id %r (line %d)", scene.scene_id, lineno)
            duplicates += 1
            continue
        scenes[scene.scene_id] = scene

    counts = {kind: 0 for kind in PairKind}
    room_counts: dict[str, dict[str, int]] = {}
    eligible_total = 0
    selected_total = 0

    files = {
        PairKind.GENERATION: (out_dir / "gen.jsonl").open("w", encoding="utf-8"),
        PairKind.ADD_EDIT: (out_dir / "add.jsonl").open("w", encoding="utf-8"),
        PairKind.REMOVE_EDIT: (out_dir / "remove.jsonl").open("w", encoding="utf-8"),
    }
    try:
        for scene_id in sorted(scenes):
            scene = scenes[scene_id]
            pairs = build_pairs(scene, templates, config)
            selected_names = next(
                (set(p.selected) for p in pairs if p.selected), set()
            )
            if len(scene.objects) > config.min_objects_for_edit:
                eligible = [
                    o for o in scene.objects
                    if not is_essential(o.category, config.essential_substrings)
                ]
                eligible_total += len(eligible)
                selected_total += len(selected_names)
            for pair in pairs:
                counts[pair.kind] += 1
                per_room = room_counts.setdefault(scene.room_type, {k.value: 0 for k in PairKind})
                per_room[pair.kind.value] += 1
                files[pair.kind].write(json.dumps(pair.to_dict()) + "\n")
    finally:
        for handle in files.values():
            handle.close()

    stats = {
        "scenes": len(scenes),
        "skipped": skipped,
        "duplicate_ids_skipped": duplicates,
        "pairs": {kind.value: counts[kind] for kind in PairKind},
        "room_types": room_counts,
        "eligible_objects": eligible_total,
        "selected_objects": selected_total,
        "selection_rate": (selected_total / eligible_total) if eligible_total else 0.0,
    }
    (out_dir / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    return stats
