"""Deterministic rule-based layout solver.

Realizes the placement rules the prompts ask a model to follow: objects go
against walls with their yaw snapped to the 90-degree grid facing the room
center, nothing overlaps, everything stays in bounds, and chairs sit
adjacent to a table facing its center. Used as the Heuristic backend, as a
test oracle, and as a fallback when no model endpoint is configured.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import PlacementInfeasible
from .geometry import (
    BBoxDims,
    PlacedObject,
    Point3,
    RoomBounds,
    SceneLayout,
    object_in_bounds,
    pair_overlap_ratio,
)

GRID_STEP = 0.1


@dataclass(frozen=True)
class PlacerConfig:
    seed: int = 0
    wall_margin: float = 0.05
    alignment_grid: float = 90.0
    chair_gap: float = 0.1
    max_attempts: int = 200

    def __post_init__(self):
        if self.wall_margin < 0 or self.chair_gap < 0:
            raise ValueError("margins must be >= 0")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def is_chair(name: str, category: str) -> bool:
    return "chair" in name.lower() or "chair" in category.lower()


def is_table(name: str, category: str) -> bool:
    text = f"{name} {category}".lower()
    return "table" in text or "desk" in text


def _dims_of(source) -> BBoxDims:
    return source.dims if hasattr(source, "dims") else source


def _category_of(source) -> str:
    return getattr(source, "category", "")


def _extents(dims: BBoxDims, yaw: float) -> tuple[float, float]:
    """Axis-aligned footprint extents (x, z) for a 90-degree-grid yaw."""
    if yaw % 180.0 == 0.0:
        return dims.w, dims.d
    return dims.d, dims.w


def _grid_positions(limit: float) -> list[float]:
    if limit < 0:
        return []
    n = int(math.floor(limit / GRID_STEP + 1e-9))
    positions = [k * GRID_STEP for k in range(-n, n + 1)]
    return positions


def _facing_center_yaw(cx: float, cz: float) -> float:
    """Yaw snapped to the 90-degree grid whose front vector points roomward."""
    if cx == 0.0 and cz == 0.0:
        return 0.0
    # front vector at yaw t is (-sin t, cos t); aim it at (-cx, -cz)
    t = math.degrees(math.atan2(cx, -cz))
    return (round(t / 90.0) * 90.0) % 360.0


class _Placer:
    def __init__(self, bounds: RoomBounds, config: PlacerConfig,
                 obstacles: list[PlacedObject]):
        self.bounds = bounds
        self.config = config
        self.placed: list[PlacedObject] = list(obstacles)

    def _valid(self, candidate: PlacedObject) -> bool:
        if object_in_bounds(candidate, self.bounds) is not None:
            return False
        return all(pair_overlap_ratio(candidate, other) == 0.0 for other in self.placed)

    def _try(self, name: str, category: str, dims: BBoxDims,
             cx: float, cz: float, yaw: float) -> PlacedObject | None:
        candidate = PlacedObject(
            name=name, category=category, dims=dims,
            center=Point3(cx, dims.h / 2.0, cz), yaw=yaw,
        )
        return candidate if self._valid(candidate) else None

    def place_against_walls(self, name: str, source) -> PlacedObject:
        dims = _dims_of(source)
        category = _category_of(source)
        cfg = self.config
        rng = random.Random(f"{cfg.seed}:{name}")
        attempts = 0

        # wall order N (z-), E (x+), S (z+), W (x-); back face against the
        # wall at wall_margin, yaw facing the room center
        walls = [
            ("N", 0.0), ("E", 90.0), ("S", 180.0), ("W", 270.0),
        ]
        for wall, yaw in walls:
            ex, ez = _extents(dims, yaw)
            if wall in ("N", "S"):
                fixed = -(self.bounds.half_z - cfg.wall_margin - ez / 2.0)
                if wall == "S":
                    fixed = -fixed
                lateral = _grid_positions(self.bounds.half_x - ex / 2.0)
            else:
                fixed = self.bounds.half_x - cfg.wall_margin - ex / 2.0
                if wall == "W":
                    fixed = -fixed
                lateral = _grid_positions(self.bounds.half_z - ez / 2.0)
            rng.shuffle(lateral)
            for pos in lateral:
                attempts += 1
                if attempts > cfg.max_attempts:
                    raise PlacementInfeasible(name)
                cx, cz = (pos, fixed) if wall in ("N", "S") else (fixed, pos)
                hit = self._try(name, category, dims, cx, cz, yaw)
                if hit is not None:
                    self.placed.append(hit)
                    return hit

        # interior fallback: full-floor grid, yaw facing the room center
        xs = _grid_positions(self.bounds.half_x - min(dims.w, dims.d) / 2.0)
        zs = _grid_positions(self.bounds.half_z - min(dims.w, dims.d) / 2.0)
        cells = [(x, z) for x in xs for z in zs]
        rng.shuffle(cells)
        for cx, cz in cells:
            attempts += 1
            if attempts > cfg.max_attempts:
                raise PlacementInfeasible(name)
            hit = self._try(name, category, dims, cx, cz, _facing_center_yaw(cx, cz))
            if hit is not None:
                self.placed.append(hit)
                return hit
        raise PlacementInfeasible(name)

    def place_chair(self, name: str, source) -> PlacedObject:
        dims = _dims_of(source)
        category = _category_of(source)
        cfg = self.config
        tables = [p for p in self.placed if is_table(p.name, p.category)]
        if not tables:
            return self.place_against_walls(name, source)

        attempts = 0
        for table in tables:
            tex, tez = _extents(table.dims, table.yaw)
            reach = cfg.chair_gap + dims.d / 2.0
            # sides in fixed order: x+, x-, z+, z-; the chair faces the table
            sides = [
                (table.center.x + tex / 2.0 + reach, None, 90.0, tez / 2.0),
                (table.center.x - tex / 2.0 - reach, None, 270.0, tez / 2.0),
                (None, table.center.z + tez / 2.0 + reach, 180.0, tex / 2.0),
                (None, table.center.z - tez / 2.0 - reach, 0.0, tex / 2.0),
            ]
            for fx, fz, yaw, span in sides:
                offsets = sorted(_grid_positions(span), key=lambda v: (abs(v), v))
                for off in offsets:
                    attempts += 1
                    if attempts > cfg.max_attempts:
                        raise PlacementInfeasible(name)
                    cx = fx if fx is not None else table.center.x + off
                    cz = fz if fz is not None else table.center.z + off
                    if not _chair_predicates_hold(cx, cz, yaw, dims, table, cfg):
                        continue
                    hit = self._try(name, category, dims, cx, cz, yaw)
                    if hit is not None:
                        self.placed.append(hit)
                        return hit
        raise PlacementInfeasible(name)


def chair_near_table(chair: PlacedObject, table: PlacedObject,
                     gap: float) -> bool:
    """Chair center inside the table footprint inflated by chair depth + gap,
    with the chair's front within 45 degrees of the table-center direction."""
    return _chair_predicates_hold(
        chair.center.x, chair.center.z, chair.yaw, chair.dims, table,
        PlacerConfig(chair_gap=gap),
    )


def _chair_predicates_hold(cx: float, cz: float, yaw: float, dims: BBoxDims,
                           table: PlacedObject, cfg: PlacerConfig) -> bool:
    tex, tez = _extents(table.dims, table.yaw)
    inflate = dims.d + cfg.chair_gap
    if abs(cx - table.center.x) > tex / 2.0 + inflate + 1e-9:
        return False
    if abs(cz - table.center.z) > tez / 2.0 + inflate + 1e-9:
        return False
    to_table = (table.center.x - cx, table.center.z - cz)
    norm = math.hypot(*to_table)
    if norm == 0.0:
        return False
    r = math.radians(yaw)
    front = (-math.sin(r), math.cos(r))
    cosine = (front[0] * to_table[0] + front[1] * to_table[1]) / norm
    return cosine >= math.cos(math.radians(45.0)) - 1e-9


def _ordered(instances) -> list[tuple[str, object]]:
    def area(entry):
        dims = _dims_of(entry[1])
        return dims.w * dims.d

    return sorted(instances, key=lambda e: (-area(e), e[0]))


def place(instances, bounds: RoomBounds, config: PlacerConfig,
          room_type: str = "room") -> SceneLayout:
    """Lay out named instances inside the bounds; raises PlacementInfeasible.

    Instances pair a name with an AssetRecord (or anything exposing dims and
    category). Non-chairs are placed area-descending against walls, chairs
    afterwards next to tables. Output is deterministic in (instances, bounds,
    seed) and invariant under input permutation.
    """
    placed = place_incremental(instances, bounds, config, obstacles=())
    return SceneLayout(room_type, bounds, tuple(placed))


def place_incremental(instances, bounds: RoomBounds, config: PlacerConfig,
                      obstacles=()) -> list[PlacedObject]:
    """Place new instances around fixed existing objects; returns only the new ones.

    Tables go first so chairs (placed right after them) can claim adjacent
    cells before other furniture crowds the table sides; remaining objects
    follow, each group in area-descending order.
    """
    instances = list(instances)
    engine = _Placer(bounds, config, list(obstacles))
    ordered = _ordered(instances)
    chairs = [e for e in ordered if is_chair(e[0], _category_of(e[1]))]
    tables = [e for e in ordered
              if e not in chairs and is_table(e[0], _category_of(e[1]))]
    rest = [e for e in ordered if e not in chairs and e not in tables]
    added: dict[str, PlacedObject] = {}
    for name, source in tables:
        added[name] = engine.place_against_walls(name, source)
    for name, source in chairs:
        added[name] = engine.place_chair(name, source)
    for name, source in rest:
        added[name] = engine.place_against_walls(name, source)
    return [added[name] for name, _ in _ordered(instances)]
