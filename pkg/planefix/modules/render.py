"""
Render Module
Draws a scenario and its report as an SVG 1.1 document (or a PNG preview
through Pillow): the domain, shaded faces, arcs with direction arrows,
image curves, certified and undecided boxes, and fixed-point markers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image, ImageDraw

from planefix import LOGGER
from planefix.modules.geom import Box, Polyline
from planefix.modules.report import Report
from planefix.modules.scenario import Scenario
from planefix.utils import InputError

LAYER_ORDER = ("domain", "faces", "arcs", "images", "boxes", "fixed-points")
MARGIN = 0.05
ARROW = 0.025
MARKER = 0.012
STROKE = 0.004
PNG_SIZE = 800

COLORS = {
    "domain": "#555555",
    "curve": "#1f77b4",
    "face": "#ffd54f",
    "arc": "#1f77b4",
    "image": "#d62728",
    "boundary": "#2ca02c",
    "box": "#6a1b9a",
    "undecided": "#9e9e9e",
    "fixed": "#000000",
}


@dataclass(frozen=True)
class Shape:
    kind: str  # polyline | polygon | rect | circle
    points: Tuple[Tuple[float, float], ...]
    stroke: Optional[str] = None
    fill: Optional[str] = None
    dashed: bool = False
    css: str = ""
    radius: float = 0.0


@dataclass
class Layer:
    name: str
    shapes: List[Shape] = field(default_factory=list)


def _arrow(p: Polyline, size: float) -> Optional[Shape]:
    """Triangle at p(0) pointing along the first segment."""
    if p.is_point:
        return None
    a = np.array(p.vertices[0])
    d = np.array(p.vertices[1]) - a
    d = d / np.hypot(*d)
    n = np.array([-d[1], d[0]])
    tip = a + size * d
    pts = (tuple(tip), tuple(a - 0.5 * size * d + 0.5 * size * n), tuple(a - 0.5 * size * d - 0.5 * size * n))
    return Shape("polygon", tuple((float(x), float(y)) for x, y in pts), fill=COLORS["arc"], css="arrow")


def _bounds(scenario: Scenario, report: Report) -> Box:
    boxes = []
    region = scenario.region_shape()
    if isinstance(region, Box):
        boxes.append(region)
    elif isinstance(region, Polyline):
        boxes.append(region.bbox)
    elif scenario.map is not None and scenario.map.domain.is_bounded:
        boxes.append(scenario.map.domain)
    for curve in scenario.curves.values():
        boxes.append(curve.bbox)
    for spec in scenario.arcs.values():
        boxes.append(spec.polyline.bbox)
    for data in report.artifacts["polylines"].values():
        boxes.append(Box.around(data["points"]))
    for p in report.artifacts["points"].values():
        boxes.append(Box.around([p]))
    for cert in report.certificates:
        boxes.append(cert.box)
    if not boxes:
        return Box(-1.0, -1.0, 1.0, 1.0)
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    pad = max(out.width, out.height, 1e-6) * MARGIN
    return out.expanded(pad)


def build_layers(scenario: Scenario, report: Report) -> Tuple[Box, List[Layer]]:
    view = _bounds(scenario, report)
    extent = max(view.width, view.height)
    layers = {name: Layer(name) for name in LAYER_ORDER}

    region = scenario.region_shape()
    if isinstance(region, Box):
        layers["domain"].shapes.append(Shape("polygon", tuple(map(tuple, region.corners())), stroke=COLORS["domain"]))
    elif isinstance(region, Polyline):
        layers["domain"].shapes.append(Shape("polygon", region.vertices, stroke=COLORS["domain"]))
    for name in sorted(scenario.curves):
        curve = scenario.curves[name]
        if name != scenario.region_curve:
            layers["domain"].shapes.append(
                Shape("polygon" if curve.closed else "polyline", curve.vertices, stroke=COLORS["curve"], css="curve"))

    for name in sorted(report.artifacts["faces"]):
        for x, y, w, h in report.artifacts["faces"][name]:
            layers["faces"].shapes.append(
                Shape("rect", ((x, y), (x + w, y + h)), fill=COLORS["face"], css="face"))

    for name in sorted(report.artifacts["polylines"]):
        data = report.artifacts["polylines"][name]
        p = report.polyline(name)
        role = data["role"]
        kind = "polygon" if p.closed else "polyline"
        if role == "image":
            layers["images"].shapes.append(Shape(kind, p.vertices, stroke=COLORS["image"], dashed=True, css="image"))
        elif role in ("arc", "boundary"):
            layers["arcs"].shapes.append(Shape(kind, p.vertices, stroke=COLORS[role], css=role))
            if role == "arc" and not p.closed:
                arrow = _arrow(p, ARROW * extent)
                if arrow is not None:
                    layers["arcs"].shapes.append(arrow)
        else:
            layers["domain"].shapes.append(Shape(kind, p.vertices, stroke=COLORS["domain"], css=role))

    for b in report.undecided_boxes:
        layers["boxes"].shapes.append(
            Shape("rect", ((b.xmin, b.ymin), (b.xmax, b.ymax)), stroke=COLORS["undecided"], dashed=True, css="undecided"))
    for cert in report.certificates:
        b = cert.box
        layers["boxes"].shapes.append(
            Shape("rect", ((b.xmin, b.ymin), (b.xmax, b.ymax)), stroke=COLORS["box"], css="certified"))
        layers["fixed-points"].shapes.append(
            Shape("circle", (cert.approx,), fill=COLORS["fixed"], css="fixed-point", radius=MARKER * extent))
    for name in sorted(report.artifacts["points"]):
        p = tuple(report.artifacts["points"][name])
        layers["fixed-points"].shapes.append(
            Shape("circle", (p,), stroke=COLORS["fixed"], css="point", radius=0.6 * MARKER * extent))

    kept = [layers["domain"]] + [layers[n] for n in LAYER_ORDER[1:] if layers[n].shapes]
    return view, kept


# ============ SVG ============
def _c(v: float) -> str:
    return f"{v:.4f}"


def _svg_points(points: Sequence[Sequence[float]]) -> str:
    return " ".join(f"{_c(x)},{_c(-y)}" for x, y in points)


def _svg_shape(s: Shape, width: float) -> str:
    stroke = f'stroke="{s.stroke}" stroke-width="{_c(width)}"' if s.stroke else 'stroke="none"'
    fill = f'fill="{s.fill}"' if s.fill else 'fill="none"'
    dash = f' stroke-dasharray="{_c(3 * width)},{_c(2 * width)}"' if s.dashed else ""
    css = f' class="{s.css}"' if s.css else ""
    if s.kind == "circle":
        (x, y), = s.points
        return f'<circle{css} cx="{_c(x)}" cy="{_c(-y)}" r="{_c(s.radius)}" {fill} {stroke}{dash}/>'
    if s.kind == "rect":
        (x0, y0), (x1, y1) = s.points
        return (f'<rect{css} x="{_c(x0)}" y="{_c(-y1)}" width="{_c(x1 - x0)}" height="{_c(y1 - y0)}" '
                f'{fill} {stroke}{dash}/>')
    tag = "polygon" if s.kind == "polygon" else "polyline"
    return f'<{tag}{css} points="{_svg_points(s.points)}" {fill} {stroke}{dash}/>'


def render_svg(scenario: Scenario, report: Report) -> str:
    """SVG 1.1 document for a run; identical inputs give identical bytes."""
    view, layers = build_layers(scenario, report)
    width = STROKE * max(view.width, view.height)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_c(view.xmin)} {_c(-view.ymax)} {_c(view.width)} {_c(view.height)}" '
        'width="800" height="800" preserveAspectRatio="xMidYMid meet">',
        f"<title>{scenario.name}: {report.task} {report.status.value}</title>",
    ]
    for layer in layers:
        out.append(f'<g id="{layer.name}">')
        out.extend("  " + _svg_shape(s, width) for s in layer.shapes)
        out.append("</g>")
    out.append("</svg>")
    LOGGER.debug(f"Rendered {sum(len(layer.shapes) for layer in layers)} shapes in {len(layers)} layers")
    return "\n".join(out) + "\n"


# ============ PNG ============
def render_png(scenario: Scenario, report: Report, size: int = PNG_SIZE) -> Image.Image:
    """Raster preview of the same layers."""
    if size < 16:
        raise InputError("png size must be at least 16 pixels")
    view, layers = build_layers(scenario, report)
    scale = (size - 1) / max(view.width, view.height)

    def px(p: Sequence[float]) -> Tuple[float, float]:
        return ((p[0] - view.xmin) * scale, (view.ymax - p[1]) * scale)

    img = Image.new("RGB", (size, size), "white")
    draw = ImageDraw.Draw(img)
    for layer in layers:
        for s in layer.shapes:
            pts = [px(p) for p in s.points]
            if s.kind == "circle":
                r = max(s.radius * scale, 2.0)
                (x, y), = pts
                draw.ellipse((x - r, y - r, x + r, y + r), fill=s.fill, outline=s.stroke)
            elif s.kind == "rect":
                (x0, y1), (x1, y0) = pts
                draw.rectangle((x0, y0, x1, y1), fill=s.fill, outline=s.stroke)
            elif s.kind == "polygon":
                draw.polygon(pts, fill=s.fill, outline=s.stroke)
            else:
                draw.line(pts, fill=s.stroke, width=max(1, int(math.ceil(size / 400))))
    return img
