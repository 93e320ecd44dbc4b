"""SVG rendering of planar r-ball bodies"""

from __future__ import annotations
from collections.abc import Iterable, Sequence
import math
from typing import NamedTuple
from .core import ArcPolygon, BallBodyResult, Empty, Region, SinglePoint

#: Pixels per unit length
SCALE = 200

MARGIN = 20


class Layer(NamedTuple):
    shape: BallBodyResult | ArcPolygon
    label: str
    stroke: str = "black"
    fill: str = "none"
    dashed: bool = False


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _point(p: Sequence[float]) -> str:
    return f"{_fmt(SCALE * p[0])},{_fmt(SCALE * p[1])}"


def arc_path(poly: ArcPolygon) -> str:
    """
    Path data for the boundary of ``poly`` in user units scaled by `SCALE`,
    with the y axis pointing up
    """
    rad = _fmt(SCALE * poly.radius)
    if poly.full_disk:
        a = poly.arcs[0]
        p0 = a.point_at(a.start_angle, poly.radius)
        p1 = a.point_at(a.start_angle + math.pi, poly.radius)
        return (
            f"M {_point(p0)} A {rad} {rad} 0 0 1 {_point(p1)}"
            f" A {rad} {rad} 0 0 1 {_point(p0)} Z"
        )
    first = poly.arcs[0]
    parts = [f"M {_point(first.point_at(first.start_angle, poly.radius))}"]
    for a in poly.arcs:
        large = 1 if a.extent > math.pi else 0
        end = a.point_at(a.end_angle, poly.radius)
        parts.append(f"A {rad} {rad} 0 {large} 1 {_point(end)}")
    parts.append("Z")
    return " ".join(parts)


def _extent(shape: BallBodyResult | ArcPolygon) -> float:
    if isinstance(shape, Empty):
        return 0.0
    elif isinstance(shape, SinglePoint):
        return max(abs(c) for c in shape.point)
    poly = shape.polygon if isinstance(shape, Region) else shape
    return max(max(abs(c) for c in a.center) for a in poly.arcs) + poly.radius


def _element(layer: Layer) -> str | None:
    shape = layer.shape
    dash = ' stroke-dasharray="6 4"' if layer.dashed else ""
    style = (
        f'stroke="{layer.stroke}" fill="{layer.fill}" stroke-width="1.5"'
        f' vector-effect="non-scaling-stroke"{dash}'
    )
    if isinstance(shape, Empty):
        return None
    elif isinstance(shape, SinglePoint):
        x, y = shape.point[0], shape.point[1]
        return (
            f'<circle class="{layer.label}" cx="{_fmt(SCALE * x)}"'
            f' cy="{_fmt(SCALE * y)}" r="3" fill="{layer.stroke}"/>'
        )
    poly = shape.polygon if isinstance(shape, Region) else shape
    return f'<path class="{layer.label}" d="{arc_path(poly)}" {style}/>'


def render(layers: Iterable[Layer], r: float) -> str:
    """
    Render ``layers`` over the reference circle ``B[o, r]``.  Coordinates
    are scaled by `SCALE` pixels per unit with the origin at the center of
    the canvas.
    """
    layers = list(layers)
    half = max([r] + [_extent(layer.shape) for layer in layers])
    size = 2 * (SCALE * half + MARGIN)
    center = size / 2
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg"'
        f' width="{_fmt(size)}" height="{_fmt(size)}"'
        f' viewBox="0 0 {_fmt(size)} {_fmt(size)}">',
        f'<g transform="translate({_fmt(center)},{_fmt(center)}) scale(1,-1)">',
        f'<circle class="reference" cx="0" cy="0" r="{_fmt(SCALE * r)}"'
        ' stroke="lightgray" fill="none" stroke-width="1"/>',
    ]
    for layer in layers:
        elem = _element(layer)
        if elem is not None:
            lines.append(elem)
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
