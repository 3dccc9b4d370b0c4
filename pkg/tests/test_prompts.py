from __future__ import annotations

import json
from pathlib import Path

import pytest

from llplace.catalog import DesignRequest, RequestItem
from llplace.geometry import BBoxDims
from llplace.prompts import (
    GENERATION_RULE_CHAIR,
    GENERATION_RULE_EDGE,
    PromptTemplates,
    default_templates,
    format_dims_json,
    render_add_prompt,
    render_generation_prompt,
    render_judge_prompt,
    render_remove_prompt,
)

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def templates():
    return default_templates()


@pytest.fixture
def bedroom_request():
    return DesignRequest("Bedroom", (RequestItem(1, "double bed"), RequestItem(2, "dining chair")))


@pytest.fixture
def bedroom_retrieved():
    return [
        ("double_bed", BBoxDims(h=1.0, w=2.0, d=1.8)),
        ("dining_chair_1", BBoxDims(h=0.9, w=0.45, d=0.45)),
        ("dining_chair_2", BBoxDims(h=0.9, w=0.45, d=0.45)),
    ]


class TestGenerationPrompt:
    def test_matches_golden_byte_for_byte(self, templates, bedroom_request, bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        assert rendered == (GOLDEN / "generation_prompt.golden").read_text(encoding="utf-8")

    def test_contains_edge_rule_verbatim(self, templates, bedroom_request, bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        assert GENERATION_RULE_EDGE in rendered
        assert GENERATION_RULE_CHAIR in rendered
        assert "The centroid of the room is" in rendered

    def test_room_type_block_contains_exactly_room_type(self, templates, bedroom_request,
                                                        bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        block = rendered.split("[Task Room Type]\n")[1].split("\n[/Task Room Type]")[0]
        assert block == "Bedroom"

    def test_quantity_expansion_keys(self, templates, bedroom_request, bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        inner = rendered.split("[Task Objects & Bounding Box Size]\n")[1]
        inner = inner.split("\n[/Task Objects & Bounding Box Size]")[0]
        data = json.loads(inner)
        assert set(data) == {"double_bed", "dining_chair_1", "dining_chair_2"}
        assert data["dining_chair_1"] == data["dining_chair_2"]

    def test_each_delimiter_exactly_once(self, templates, bedroom_request, bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        for token in ("[Task Room Type]", "[/Task Room Type]",
                      "[Task Objects & Bounding Box Size]", "[/Task Objects & Bounding Box Size]"):
            assert rendered.count(token) == 1

    def test_objects_json_round_trips(self, templates):
        pairs = [("a_thing", BBoxDims(1.23, 0.77, 2.5)), ("b_thing", BBoxDims(0.4, 0.6, 0.8))]
        data = json.loads(format_dims_json(pairs))
        assert data == {"a_thing": {"h": 1.23, "w": 0.77, "d": 2.5},
                        "b_thing": {"h": 0.4, "w": 0.6, "d": 0.8}}

    def test_empty_retrieved_rejected(self, templates, bedroom_request):
        with pytest.raises(ValueError):
            render_generation_prompt(bedroom_request, [], templates)

    def test_rendering_is_deterministic(self, templates, bedroom_request, bedroom_retrieved):
        first = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        second = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        assert first == second


class TestAddPrompt:
    def test_matches_golden(self, templates):
        rendered = render_add_prompt([("tall_bookshelf", BBoxDims(1.9, 0.9, 0.35))], templates)
        assert rendered == (GOLDEN / "add_prompt.golden").read_text(encoding="utf-8")

    def test_contains_block_and_bbox(self, templates):
        rendered = render_add_prompt([("tall_bookshelf", BBoxDims(1.9, 0.9, 0.35))], templates)
        assert "[Add Objects]" in rendered and "[/Add Objects]" in rendered
        assert '"tall_bookshelf": {"h": 1.90, "w": 0.90, "d": 0.35}' in rendered

    def test_ends_instructing_added_output_termination(self, templates):
        rendered = render_add_prompt([("lamp", BBoxDims(1.6, 0.3, 0.3))], templates)
        assert rendered.rstrip().endswith("the output will end at [/Added Output].")

    def test_empty_rejected(self, templates):
        with pytest.raises(ValueError):
            render_add_prompt([], templates)


class TestRemovePrompt:
    def test_matches_golden(self, templates):
        rendered = render_remove_prompt(
            [RequestItem(1, "a TV stand"), RequestItem(1, "one chair")], templates
        )
        assert rendered == (GOLDEN / "remove_prompt.golden").read_text(encoding="utf-8")

    def test_single_entry_json(self, templates):
        rendered = render_remove_prompt([RequestItem(1, "one chair")], templates)
        inner = rendered.split("[Delete Objects]\n")[1].split("\n[/Delete Objects]")[0]
        assert json.loads(inner) == ["one chair"]

    def test_description_verbatim(self, templates):
        rendered = render_remove_prompt([RequestItem(1, "a TV stand")], templates)
        assert '"a TV stand"' in rendered

    def test_quantity_expands_entries(self, templates):
        rendered = render_remove_prompt([RequestItem(2, "chair")], templates)
        inner = rendered.split("[Delete Objects]\n")[1].split("\n[/Delete Objects]")[0]
        assert json.loads(inner) == ["chair", "chair"]

    def test_empty_rejected(self, templates):
        with pytest.raises(ValueError):
            render_remove_prompt([], templates)


class TestJudgePrompt:
    def test_matches_golden(self, templates):
        rendered = render_judge_prompt("a cozy bedroom with warm lighting", templates)
        assert rendered == (GOLDEN / "judge_prompt.golden").read_text(encoding="utf-8")

    def test_aspect_names_present(self, templates):
        rendered = render_judge_prompt("anything", templates)
        assert "Functionality and Activity-based Alignment" in rendered
        assert "Aesthetics of the room's layout" in rendered
        assert "Layout and furniture" in rendered

    def test_preferences_substituted_verbatim(self, templates):
        rendered = render_judge_prompt("cozy bedroom", templates)
        assert "```cozy bedroom```" in rendered


class TestTemplateLoading:
    def test_load_from_directory_round_trip(self, tmp_path, templates):
        src = Path(__file__).parent.parent / "src" / "llplace" / "templates"
        loaded = PromptTemplates.load(src)
        assert loaded == templates

    def test_turn_end_token_default(self, templates):
        assert templates.turn_end_token == "<|eot_id|>"

    def test_prompts_never_append_turn_end_token(self, templates, bedroom_request,
                                                 bedroom_retrieved):
        rendered = render_generation_prompt(bedroom_request, bedroom_retrieved, templates)
        assert templates.turn_end_token not in rendered
