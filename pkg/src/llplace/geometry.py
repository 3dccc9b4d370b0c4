"""Geometric core: oriented boxes, room layouts, and box-pair intersection.

Conventions (fixed for the whole package):
  * y is the vertical axis; object footprints live in the XZ plane.
  * yaw is a rotation about the vertical axis, stored in degrees
    normalized to [0, 360), counter-clockwise in the XZ plane
    (viewed from +y with x to the right and z upward on the page).
  * the floor is at y = 0 and the room spans [0, bounds.height]
    vertically; an object resting on the floor has center.y = h / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Intersection polygons thinner than this are treated as disjoint, and
# overlap ratios within this distance of 1 snap to exactly 1 (touching
# faces and complete embedding are both exact endpoints by contract).
AREA_EPS = 1e-12
RATIO_SNAP_EPS = 1e-9
BOUNDS_EPS = 1e-9


def normalize_yaw(angle: float) -> float:
    """Map any finite angle in degrees onto [0, 360)."""
    if not math.isfinite(angle):
        raise ValueError(f"yaw must be finite, got {angle!r}")
    a = math.fmod(angle, 360.0)
    if a < 0.0:
        a += 360.0
    if a >= 360.0:  # fmod can return 360.0 - epsilon rounding up
        a -= 360.0
    return a + 0.0  # normalize -0.0


@dataclass(frozen=True)
class BBoxDims:
    """Box dimensions in meters: h vertical, w along x and d along z at yaw 0."""

    h: float
    w: float
    d: float

    def __post_init__(self):
        for axis in ("h", "w", "d"):
            v = getattr(self, axis)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"dimension {axis} must be finite and > 0, got {v!r}")

    @property
    def volume(self) -> float:
        return self.h * self.w * self.d


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for axis in ("x", "y", "z"):
            v = getattr(self, axis)
            if not math.isfinite(v):
                raise ValueError(f"coordinate {axis} must be finite, got {v!r}")


@dataclass(frozen=True)
class PlacedObject:
    """One object instance: named box with a centroid and a yaw angle."""

    name: str
    category: str
    dims: BBoxDims
    center: Point3
    yaw: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("object name must be non-empty")
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def volume(self) -> float:
        return self.dims.volume


@dataclass(frozen=True)
class RoomBounds:
    """Rectangular room centered at the origin in XZ, floor at y = 0."""

    half_x: float
    half_z: float
    height: float

    def __post_init__(self):
        for axis in ("half_x", "half_z", "height"):
            v = getattr(self, axis)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{axis} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class SceneLayout:
    """Room type, bounds, and an ordered list of placed objects.

    Name uniqueness is guaranteed by every producing operation (retrieval,
    parsing, placement) and reported by validate_layout; the constructor
    does not reject duplicates so that diagnostic reporting stays possible.
    """

    room_type: str
    bounds: RoomBounds
    objects: tuple[PlacedObject, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    def names(self) -> list[str]:
        return [o.name for o in self.objects]


# --- footprints and exact intersection ---


def _rotation(yaw_deg: float) -> tuple[float, float]:
    r = math.radians(yaw_deg)
    return math.cos(r), math.sin(r)


def footprint_polygon(obj: PlacedObject) -> list[tuple[float, float]]:
    """Four corners of the object's w x d footprint in the XZ plane.

    Corners are returned counter-clockwise; rotation preserves the order.
    """
    c, s = _rotation(obj.yaw)
    hw, hd = obj.dims.w / 2.0, obj.dims.d / 2.0
    base = [(hw, hd), (-hw, hd), (-hw, -hd), (hw, -hd)]
    cx, cz = obj.center.x, obj.center.z
    return [(cx + x * c - z * s, cz + x * s + z * c) for x, z in base]


def polygon_area(poly: list[tuple[float, float]]) -> float:
    """Shoelace area; input is assumed counter-clockwise (result >= 0)."""
    if len(poly) < 3:
        return 0.0
    total = 0.0
    for i, (x1, z1) in enumerate(poly):
        x2, z2 = poly[(i + 1) % len(poly)]
        total += x1 * z2 - x2 * z1
    return abs(total) / 2.0


def clip_convex(subject: list[tuple[float, float]],
                clip: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of one convex CCW polygon against another.

    Points on a clip edge (within AREA_EPS) count as inside, so a polygon
    clipped against itself comes back with its vertices untouched.
    """
    output = list(subject)
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, az = clip[i]
        bx, bz = clip[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        inside = [ex * (pz - az) - ez * (px - ax) >= -AREA_EPS for px, pz in output]
        result: list[tuple[float, float]] = []
        m = len(output)
        for j in range(m):
            cur, nxt = output[j], output[(j + 1) % m]
            if inside[j]:
                result.append(cur)
            if inside[j] != inside[(j + 1) % m]:
                # edge crosses the clip line; interpolate the crossing point
                d1 = ex * (cur[1] - az) - ez * (cur[0] - ax)
                d2 = ex * (nxt[1] - az) - ez * (nxt[0] - ax)
                t = d1 / (d1 - d2)
                result.append((cur[0] + t * (nxt[0] - cur[0]),
                               cur[1] + t * (nxt[1] - cur[1])))
        output = result
    return output


def _vertical_overlap(a: PlacedObject, b: PlacedObject) -> float:
    a_lo, a_hi = a.center.y - a.dims.h / 2.0, a.center.y + a.dims.h / 2.0
    b_lo, b_hi = b.center.y - b.dims.h / 2.0, b.center.y + b.dims.h / 2.0
    return min(a_hi, b_hi) - max(a_lo, b_lo)


def pair_intersection_volume(a: PlacedObject, b: PlacedObject) -> float:
    """Exact intersection volume of two yaw-rotated boxes.

    Vertical interval overlap times the area of the clipped footprint
    polygons; 0 when the boxes are disjoint or merely touching.
    """
    dy = _vertical_overlap(a, b)
    if dy <= 0.0:
        return 0.0
    area = polygon_area(clip_convex(footprint_polygon(a), footprint_polygon(b)))
    if area <= AREA_EPS:
        return 0.0
    return dy * area


def pair_overlap_ratio(a: PlacedObject, b: PlacedObject) -> float:
    """Intersection volume divided by the smaller box volume, in [0, 1].

    0 means no overlap; 1 means the smaller box is completely embedded in
    the larger one. Values within RATIO_SNAP_EPS of the endpoints snap so
    the identity and embedding cases are exact.
    """
    inter = pair_intersection_volume(a, b)
    if inter <= 0.0:
        return 0.0
    ratio = inter / min(a.volume, b.volume)
    if ratio >= 1.0 - RATIO_SNAP_EPS:
        return 1.0
    return max(ratio, 0.0)


def mc_intersection_volume(a: PlacedObject, b: PlacedObject,
                           samples: int, seed: int) -> float:
    """Monte-Carlo intersection volume; verification oracle for the exact path.

    Samples uniform points inside the smaller box and returns the fraction
    landing inside the other box times the smaller volume. Deterministic
    for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    small, other = (a, b) if a.volume <= b.volume else (b, a)
    rng = np.random.default_rng(seed)

    half = np.array([small.dims.w / 2.0, small.dims.h / 2.0, small.dims.d / 2.0])
    local = rng.uniform(-1.0, 1.0, size=(samples, 3)) * half

    c, s = _rotation(small.yaw)
    wx = local[:, 0] * c - local[:, 2] * s + small.center.x
    wy = local[:, 1] + small.center.y
    wz = local[:, 0] * s + local[:, 2] * c + small.center.z

    co, so = _rotation(other.yaw)
    dx = wx - other.center.x
    dz = wz - other.center.z
    ox = dx * co + dz * so
    oz = -dx * so + dz * co
    oy = wy - other.center.y

    tol = 1e-9
    inside = (
        (np.abs(ox) <= other.dims.w / 2.0 + tol)
        & (np.abs(oy) <= other.dims.h / 2.0 + tol)
        & (np.abs(oz) <= other.dims.d / 2.0 + tol)
    )
    return float(inside.mean()) * small.volume


# --- layout validation ---


@dataclass(frozen=True)
class LayoutValidation:
    """Per-layout diagnostic report from validate_layout."""

    out_of_bounds: tuple[tuple[str, str], ...]
    duplicate_names: tuple[str, ...]
    invalid_dims: tuple[str, ...]

    @property
    def total_violations(self) -> int:
        return len(self.out_of_bounds) + len(self.duplicate_names) + len(self.invalid_dims)

    @property
    def ok(self) -> bool:
        return self.total_violations == 0


def object_in_bounds(obj: PlacedObject, bounds: RoomBounds) -> str | None:
    """Reason string when the object violates the room bounds, else None."""
    for x, z in footprint_polygon(obj):
        if abs(x) > bounds.half_x + BOUNDS_EPS or abs(z) > bounds.half_z + BOUNDS_EPS:
            return f"footprint corner ({x:.3f}, {z:.3f}) outside room"
    lo = obj.center.y - obj.dims.h / 2.0
    hi = obj.center.y + obj.dims.h / 2.0
    if lo < -BOUNDS_EPS or hi > bounds.height + BOUNDS_EPS:
        return f"vertical extent [{lo:.3f}, {hi:.3f}] outside [0, {bounds.height:.3f}]"
    return None


def validate_layout(layout: SceneLayout) -> LayoutValidation:
    out_of_bounds = []
    duplicates = []
    invalid_dims = []
    seen: set[str] = set()
    for obj in layout.objects:
        if obj.name in seen:
            duplicates.append(obj.name)
        seen.add(obj.name)
        if min(obj.dims.h, obj.dims.w, obj.dims.d) <= 0:
            invalid_dims.append(obj.name)
        reason = object_in_bounds(obj, layout.bounds)
        if reason is not None:
            out_of_bounds.append((obj.name, reason))
    return LayoutValidation(tuple(out_of_bounds), tuple(duplicates), tuple(invalid_dims))


# --- persistence (layout JSON) ---


def layout_to_dict(layout: SceneLayout) -> dict:
    return {
        "room_type": layout.room_type,
        "bounds": {
            "half_x": layout.bounds.half_x,
            "half_z": layout.bounds.half_z,
            "height": layout.bounds.height,
        },
        "objects": [
            {
                "name": o.name,
                "category": o.category,
                "bbox": {"h": o.dims.h, "w": o.dims.w, "d": o.dims.d},
                "coordinates": {"x": o.center.x, "y": o.center.y, "z": o.center.z},
                "angle": o.yaw,
            }
            for o in layout.objects
        ],
    }


def layout_from_dict(data: dict) -> SceneLayout:
    try:
        bounds = RoomBounds(
            half_x=float(data["bounds"]["half_x"]),
            half_z=float(data["bounds"]["half_z"]),
            height=float(data["bounds"]["height"]),
        )
        objects = []
        for entry in data["objects"]:
            bbox = entry["bbox"]
            coords = entry["coordinates"]
            objects.append(
                PlacedObject(
                    name=str(entry["name"]),
                    category=str(entry.get("category", "")),
                    dims=BBoxDims(float(bbox["h"]), float(bbox["w"]), float(bbox["d"])),
                    center=Point3(float(coords["x"]), float(coords["y"]), float(coords["z"])),
                    yaw=float(entry["angle"]),
                )
            )
        return SceneLayout(str(data["room_type"]), bounds, tuple(objects))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed layout JSON: {exc!r}") from exc
