"""Scene diagnostics: overlap rate, bounds/alignment rates, judge-score parsing.

The overlap rate of a scene is the mean pairwise overlap ratio over all
unordered object pairs (0 when fewer than two objects); the per-pair ratio
is intersection volume over the smaller box volume. Out-of-bounds and
alignment rates are companion geometric signals, not model-comparison
metrics.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from itertools import combinations

from .errors import MalformedJson, MissingAspect
from .geometry import SceneLayout, object_in_bounds, pair_overlap_ratio

ALIGNMENT_EPS = 1e-6


@dataclass(frozen=True)
class MetricsReport:
    oor_mean: float
    oor_max: float
    overlapping_pairs: tuple[tuple[str, str, float], ...]
    oob_rate: float
    alignment_rate: float
    object_count: int

    def to_dict(self) -> dict:
        return {
            "oor_mean": self.oor_mean,
            "oor_max": self.oor_max,
            "overlapping_pairs": [list(p) for p in self.overlapping_pairs],
            "oob_rate": self.oob_rate,
            "alignment_rate": self.alignment_rate,
            "object_count": self.object_count,
        }


@dataclass(frozen=True)
class JudgeScores:
    functionality: float
    layout_furniture: float
    aesthetics: float


def scene_oor(layout: SceneLayout) -> tuple[float, float, list[tuple[str, str, float]]]:
    """Mean and max overlap ratio over all unordered pairs, plus the overlapping pairs."""
    objects = layout.objects
    if len(objects) < 2:
        return 0.0, 0.0, []
    ratios = []
    overlapping = []
    for a, b in combinations(objects, 2):
        r = pair_overlap_ratio(a, b)
        ratios.append(r)
        if r > 0.0:
            overlapping.append((a.name, b.name, r))
    return sum(ratios) / len(ratios), max(ratios), overlapping


def out_of_bounds_rate(layout: SceneLayout) -> float:
    if not layout.objects:
        return 0.0
    outside = sum(
        1 for o in layout.objects if object_in_bounds(o, layout.bounds) is not None
    )
    return outside / len(layout.objects)


def alignment_rate(layout: SceneLayout) -> float:
    """Fraction of objects whose yaw sits on the 90-degree grid; 1.0 when empty."""
    if not layout.objects:
        return 1.0
    aligned = sum(
        1
        for o in layout.objects
        if min(o.yaw % 90.0, 90.0 - (o.yaw % 90.0)) <= ALIGNMENT_EPS
    )
    return aligned / len(layout.objects)


def evaluate_layout(layout: SceneLayout) -> MetricsReport:
    mean, peak, overlapping = scene_oor(layout)
    return MetricsReport(
        oor_mean=mean,
        oor_max=peak,
        overlapping_pairs=tuple(overlapping),
        oob_rate=out_of_bounds_rate(layout),
        alignment_rate=alignment_rate(layout),
        object_count=len(layout.objects),
    )


# --- judge-score parsing ---

_ASPECT_PATTERNS = {
    "functionality": "functionality",
    "layout_furniture": "layout",
    "aesthetics": "aesthetic",
}


def _first_json_object(text: str) -> dict:
    start = text.find("{")
    while start >= 0:
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    try:
                        data = json.loads(text[start:i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(data, dict):
                        return data
                    break
        start = text.find("{", start + 1)
    raise MalformedJson("no JSON object found in judge response")


def _normalize_key(key: str) -> str:
    return re.sub(r"[^0-9a-z]+", "_", key.lower()).strip("_")


def parse_judge_scores(response: str) -> JudgeScores:
    """Read the three 0-10 aspect grades from a judge response.

    Accepts both the exact aspect names and snake-case keys; scores clamp
    into [0, 10].
    """
    data = _first_json_object(response)
    normalized = {_normalize_key(k): v for k, v in data.items()}
    values = {}
    for aspect, needle in _ASPECT_PATTERNS.items():
        found = None
        for key, value in normalized.items():
            if needle in key:
                found = value
                break
        if found is None:
            raise MissingAspect(f"judge response is missing {aspect!r}")
        if isinstance(found, bool) or not isinstance(found, (int, float)) or not math.isfinite(found):
            raise MalformedJson(f"score for {aspect!r} must be a number, got {found!r}")
        values[aspect] = min(10.0, max(0.0, float(found)))
    return JudgeScores(**values)
