from __future__ import annotations

import json
import random

import pytest

from llplace.dataset import (
    BuilderConfig,
    PairKind,
    SceneObject,
    SceneRecord,
    build_corpus,
    build_pairs,
    is_essential,
    parse_scene_line,
    scene_rng,
    select_editable,
)
from llplace.geometry import BBoxDims, Point3
from llplace.parsing import OutputBlockKind, parse_output
from llplace.prompts import default_templates

TEMPLATES = default_templates()


def obj(name, category="thing", w=0.5, h=0.5, d=0.5, x=0.0, z=0.0, yaw=0.0):
    return SceneObject(name, category, BBoxDims(h, w, d), Point3(x, h / 2, z), yaw)


def scene(scene_id, names_categories, room_type="Bedroom"):
    objects = tuple(
        obj(name, category, x=round(i * 0.6 - 1.5, 2))
        for i, (name, category) in enumerate(names_categories)
    )
    return SceneRecord(scene_id, room_type, objects)


SIX_OBJECTS = [
    ("double_bed", "bed"), ("nightstand_1", "nightstand"), ("nightstand_2", "nightstand"),
    ("floor_lamp", "lamp"), ("plant", "plant"), ("mirror", "mirror"),
]


class FakeRng:
    def __init__(self, draws):
        self._draws = list(draws)

    def random(self):
        return self._draws.pop(0)


class TestSelectEditable:
    def test_four_object_scene_selects_nothing(self):
        s = scene("s1", SIX_OBJECTS[:4])
        assert select_editable(s.objects, BuilderConfig(), FakeRng([0.0] * 4)) == []

    def test_essential_categories_never_selected(self):
        s = scene("s2", [("double_bed", "double bed")] + SIX_OBJECTS[1:])
        config = BuilderConfig()
        for seed_draws in ([0.0] * 6, [0.39] * 6):
            selected = select_editable(s.objects, config, FakeRng(seed_draws))
            assert "double_bed" not in selected

    def test_threshold_rule_with_fixed_draws(self):
        entries = [("a", "plant"), ("b", "mirror"), ("c", "rug"),
                   ("keep1", "bed"), ("keep2", "sofa")]
        s = scene("s3", entries)
        # eligible draws 0.1, 0.7, 0.3 -> first and third selected
        selected = select_editable(s.objects, BuilderConfig(),
                                   FakeRng([0.1, 0.7, 0.3, 0.9, 0.9]))
        assert selected == ["a", "c"]

    def test_one_draw_per_object_in_order(self):
        entries = [("bed", "bed"), ("a", "plant"), ("b", "mirror"),
                   ("c", "rug"), ("d", "vase")]
        # the essential bed consumes the first draw
        selected = select_editable(scene("s4", entries).objects, BuilderConfig(),
                                   FakeRng([0.0, 0.9, 0.1, 0.9, 0.1]))
        assert selected == ["b", "d"]

    def test_is_essential_substring(self):
        assert is_essential("armchair")
        assert is_essential("Double Bed")
        assert not is_essential("plant")


class TestBuildPairs:
    def test_three_object_scene_single_generation_pair(self):
        pairs = build_pairs(scene("s5", SIX_OBJECTS[:3]), TEMPLATES, BuilderConfig(seed=1))
        assert [p.kind for p in pairs] == [PairKind.GENERATION]
        assert pairs[0].selected == ()

    def _edit_scene_pairs(self, seed=0):
        # pick a seed whose selection is nonempty
        for s in range(seed, seed + 50):
            config = BuilderConfig(seed=s)
            sc = scene("s6", SIX_OBJECTS)
            pairs = build_pairs(sc, TEMPLATES, config)
            if len(pairs) == 3:
                return sc, pairs, config
        raise AssertionError("no seed produced a selection")

    def test_add_label_is_full_scene(self):
        sc, pairs, _ = self._edit_scene_pairs()
        add = next(p for p in pairs if p.kind is PairKind.ADD_EDIT)
        parsed = parse_output(add.label, OutputBlockKind.ADDED_OUTPUT,
                              {o.name for o in sc.objects})
        assert {r.name for r in parsed} == {o.name for o in sc.objects}

    def test_remove_label_is_corrupted_scene(self):
        sc, pairs, _ = self._edit_scene_pairs()
        remove = next(p for p in pairs if p.kind is PairKind.REMOVE_EDIT)
        survivors = {o.name for o in sc.objects} - set(remove.selected)
        parsed = parse_output(remove.label, OutputBlockKind.DELETED_OUTPUT, survivors)
        assert {r.name for r in parsed} == survivors

    def test_generation_pair_corrupted_when_add_emitted(self):
        sc, pairs, _ = self._edit_scene_pairs()
        gen = next(p for p in pairs if p.kind is PairKind.GENERATION)
        survivors = {o.name for o in sc.objects} - set(
            next(p for p in pairs if p.selected).selected
        )
        parsed = parse_output(gen.label, OutputBlockKind.TASK_OUTPUT, survivors)
        assert {r.name for r in parsed} == survivors

    def test_generation_pair_full_when_add_disabled(self):
        sc, pairs, config = self._edit_scene_pairs()
        no_add = BuilderConfig(seed=config.seed, emit_add=False)
        pairs2 = build_pairs(sc, TEMPLATES, no_add)
        gen = next(p for p in pairs2 if p.kind is PairKind.GENERATION)
        parsed = parse_output(gen.label, OutputBlockKind.TASK_OUTPUT,
                              {o.name for o in sc.objects})
        assert len(parsed) == len(sc.objects)
        assert all(p.kind is not PairKind.ADD_EDIT for p in pairs2)

    def test_inputs_end_with_turn_end_token(self):
        sc, pairs, config = self._edit_scene_pairs()
        for pair in pairs:
            assert pair.input.endswith(config.turn_end_token)

    def test_no_essential_in_selected(self):
        rng = random.Random(77)
        categories = ["plant", "mirror", "rug", "bed", "sofa", "armchair", "lamp", "vase"]
        for case in range(40):
            entries = [(f"o{i}", rng.choice(categories)) for i in range(rng.randint(2, 9))]
            sc = scene(f"sc{case}", entries)
            pairs = build_pairs(sc, TEMPLATES, BuilderConfig(seed=case))
            for pair in pairs:
                for name in pair.selected:
                    category = next(o.category for o in sc.objects if o.name == name)
                    assert not is_essential(category)

    def test_deterministic_per_seed(self):
        sc = scene("s7", SIX_OBJECTS)
        a = build_pairs(sc, TEMPLATES, BuilderConfig(seed=9))
        b = build_pairs(sc, TEMPLATES, BuilderConfig(seed=9))
        assert a == b


def scene_line(scene_id, entries, room_type="Bedroom"):
    return json.dumps(
        {
            "scene_id": scene_id,
            "room_type": room_type,
            "objects": [
                {
                    "name": name,
                    "category": category,
                    "bbox": {"h": 0.5, "w": 0.5, "d": 0.5},
                    "coordinates": {"x": round(i * 0.6 - 1.5, 2), "y": 0.25, "z": 0.0},
                    "angle": 0.0,
                }
                for i, (name, category) in enumerate(entries)
            ],
        }
    )


class TestBuildCorpus:
    def test_empty_input(self, tmp_path):
        stats = build_corpus([], TEMPLATES, BuilderConfig(), tmp_path)
        assert stats["scenes"] == 0
        for name in ("gen.jsonl", "add.jsonl", "remove.jsonl"):
            assert (tmp_path / name).read_text() == ""
        assert stats["pairs"] == {"generation": 0, "add": 0, "remove": 0}

    def test_duplicate_scene_ids_skipped(self, tmp_path):
        lines = [scene_line("dup", SIX_OBJECTS[:3]), scene_line("dup", SIX_OBJECTS[:4])]
        stats = build_corpus(lines, TEMPLATES, BuilderConfig(), tmp_path)
        assert stats["scenes"] == 1
        assert stats["duplicate_ids_skipped"] == 1

    def test_unreadable_record_skipped_and_counted(self, tmp_path):
        lines = [scene_line("ok", SIX_OBJECTS[:3]), "{broken json", scene_line("ok2", SIX_OBJECTS[:2])]
        stats = build_corpus(lines, TEMPLATES, BuilderConfig(), tmp_path)
        assert stats["scenes"] == 2 and stats["skipped"] == 1

    def test_rebuild_is_byte_identical(self, tmp_path):
        rng = random.Random(100)
        lines = [
            scene_line(f"scene_{i:03d}",
                       [(f"o{j}", rng.choice(["plant", "mirror", "bed", "rug"]))
                        for j in range(rng.randint(1, 8))])
            for i in range(40)
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        build_corpus(lines, TEMPLATES, BuilderConfig(seed=3), out1)
        build_corpus(lines, TEMPLATES, BuilderConfig(seed=3), out2)
        for name in ("gen.jsonl", "add.jsonl", "remove.jsonl", "stats.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_selection_rate_binomial(self, tmp_path):
        # 500 scenes of n=6 with exactly 3 eligible objects each
        entries = [("bed", "bed"), ("sofa", "sofa"), ("lamp", "lamp"),
                   ("plant", "plant"), ("mirror", "mirror"), ("rug", "rug")]
        lines = [scene_line(f"s{i}", entries) for i in range(500)]
        stats = build_corpus(lines, TEMPLATES, BuilderConfig(seed=0), tmp_path)
        assert stats["eligible_objects"] == 1500
        assert abs(stats["selection_rate"] - 0.40) <= 0.05

    def test_output_lines_have_schema(self, tmp_path):
        lines = [scene_line("s", SIX_OBJECTS)]
        build_corpus(lines, TEMPLATES, BuilderConfig(seed=4), tmp_path)
        for name in ("gen.jsonl", "add.jsonl", "remove.jsonl"):
            for raw in (tmp_path / name).read_text().splitlines():
                data = json.loads(raw)
                assert set(data) == {"kind", "scene_id", "input", "label", "selected"}

    def test_counts_per_room_type(self, tmp_path):
        lines = [scene_line("s1", SIX_OBJECTS[:3], "Bedroom"),
                 scene_line("s2", SIX_OBJECTS[:2], "Livingroom")]
        stats = build_corpus(lines, TEMPLATES, BuilderConfig(), tmp_path)
        assert set(stats["room_types"]) == {"Bedroom", "Livingroom"}


class TestParseSceneLine:
    def test_round_trip(self):
        record = parse_scene_line(scene_line("sx", SIX_OBJECTS[:2]))
        assert record.scene_id == "sx"
        assert [o.name for o in record.objects] == ["double_bed", "nightstand_1"]

    def test_rng_seeding_is_stable(self):
        config = BuilderConfig(seed=5)
        assert scene_rng(config, "abc").random() == scene_rng(config, "abc").random()
        assert scene_rng(config, "abc").random() != scene_rng(config, "abd").random()
