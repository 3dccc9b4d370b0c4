"""Top-down SVG rendering of layouts.

Pure text generation: the same layout and style always produce
byte-identical documents. Each object becomes a <g class="obj"> holding a
rotated footprint polygon, a heading tick showing the yaw, and an optional
name label.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping

from .geometry import SceneLayout, footprint_polygon

PADDING_PX = 20.0

DEFAULT_PALETTE: Mapping[str, str] = {
    "bed": "#8ecae6",
    "sofa": "#95d5b2",
    "chair": "#ffb703",
    "table": "#e9c46a",
    "desk": "#e9c46a",
    "lamp": "#f4a261",
    "wardrobe": "#b5838d",
    "nightstand": "#cdb4db",
}


@dataclass(frozen=True)
class RenderStyle:
    pixels_per_meter: float = 100.0
    palette: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_PALETTE))
    show_labels: bool = True
    show_room_outline: bool = True

    def __post_init__(self):
        if self.pixels_per_meter <= 0:
            raise ValueError("pixels_per_meter must be > 0")


def category_color(category: str, palette: Mapping[str, str]) -> str:
    key = category.lower()
    for needle, color in palette.items():
        if needle in key:
            return color
    digest = hashlib.md5(category.encode("utf-8")).hexdigest()
    return f"#{digest[:6]}"


def _px(v: float) -> str:
    return f"{v:.2f}"


def render_layout(layout: SceneLayout, style: RenderStyle = RenderStyle()) -> str:
    """Room rectangle plus one rotated footprint per object; total function."""
    ppm = style.pixels_per_meter
    width = 2 * layout.bounds.half_x * ppm + 2 * PADDING_PX
    height = 2 * layout.bounds.half_z * ppm + 2 * PADDING_PX

    def to_screen(x: float, z: float) -> tuple[float, float]:
        return (x + layout.bounds.half_x) * ppm + PADDING_PX, \
               (z + layout.bounds.half_z) * ppm + PADDING_PX

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_px(width)}" '
        f'height="{_px(height)}" viewBox="0 0 {_px(width)} {_px(height)}">',
        f'<rect width="{_px(width)}" height="{_px(height)}" fill="#ffffff"/>',
    ]
    if style.show_room_outline:
        x0, z0 = to_screen(-layout.bounds.half_x, -layout.bounds.half_z)
        lines.append(
            f'<rect class="room" x="{_px(x0)}" y="{_px(z0)}" '
            f'width="{_px(2 * layout.bounds.half_x * ppm)}" '
            f'height="{_px(2 * layout.bounds.half_z * ppm)}" '
            f'fill="none" stroke="#333333" stroke-width="2"/>'
        )
    for obj in layout.objects:
        corners = [to_screen(x, z) for x, z in footprint_polygon(obj)]
        points = " ".join(f"{_px(x)},{_px(y)}" for x, y in corners)
        color = category_color(obj.category or obj.name, style.palette)
        cx, cy = to_screen(obj.center.x, obj.center.z)
        r = math.radians(obj.yaw)
        tick = to_screen(
            obj.center.x - math.sin(r) * obj.dims.d / 2.0,
            obj.center.z + math.cos(r) * obj.dims.d / 2.0,
        )
        lines.append('<g class="obj">')
        lines.append(
            f'<polygon points="{points}" fill="{color}" fill-opacity="0.75" '
            f'stroke="#222222" stroke-width="1"/>'
        )
        lines.append(
            f'<line x1="{_px(cx)}" y1="{_px(cy)}" x2="{_px(tick[0])}" y2="{_px(tick[1])}" '
            f'stroke="#222222" stroke-width="1.5"/>'
        )
        if style.show_labels:
            lines.append(
                f'<text x="{_px(cx)}" y="{_px(cy)}" font-size="11" '
                f'text-anchor="middle" fill="#111111">{obj.name}</text>'
            )
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
