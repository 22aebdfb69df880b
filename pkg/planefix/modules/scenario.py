"""
Scenario Module
Line-oriented scenario files: `[section name]` headers followed by
`key = value` lines. See scenarios/GRAMMAR.md for the grammar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from planefix import LOGGER
from planefix.modules.angles import circle_polyline
from planefix.modules.builtin_maps import example_1_2, example_4_5
from planefix.modules.geom import Box, Polyline, Tolerances
from planefix.modules.maps import (
    Affine,
    ComplexScaleRot,
    Compose,
    FoldMap,
    GridPL,
    MapExpr,
    SpiralMap,
    Translate,
)
from planefix.utils import InputError, PointTuple, ScenarioError

HEADER = re.compile(r"^\[\s*([A-Za-z_]\w*)(?:\s+([A-Za-z_][\w.-]*))?\s*\]\s*$")
ENTRY = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.*)$")
NAMED_SECTIONS = {"curve", "arc", "point", "angle"}
SINGLE_SECTIONS = {"scenario", "tolerances", "region", "qivt", "outflank", "builtin"}
TRUE_WORDS = {"true", "yes", "on", "1"}
FALSE_WORDS = {"false", "no", "off", "0"}
MAP_KINDS = ("AFFINE", "COMPLEX_SCALE_ROT", "TRANSLATE", "COMPOSE", "GRID_PL", "FOLD", "SPIRAL")
ANGLE_KINDS = ("DIRECTED", "ROTATIONAL", "WINDING", "SIDE", "ORIENTATION")
VALUES_PER_LINE = 8

Region = Union[Box, Polyline]


class Task(str, Enum):
    ANGLES = "ANGLES"
    CHECK_QIVT = "CHECK_QIVT"
    OUTFLANK_VALIDATE = "OUTFLANK_VALIDATE"
    OUTFLANK_CONSTRUCT = "OUTFLANK_CONSTRUCT"
    CERTIFY = "CERTIFY"
    RENDER = "RENDER"


# ============ SCENARIO VALUES ============
@dataclass(frozen=True)
class ArcSpec:
    polyline: Polyline
    params: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class QivtSpec:
    disc: str
    arc: str
    x: float
    y: float


@dataclass(frozen=True)
class OutflankSpec:
    arc: Optional[str] = None
    start: Optional[PointTuple] = None
    period: Optional[int] = None


@dataclass(frozen=True)
class AngleQuery:
    name: str
    kind: str
    curve: Optional[str] = None
    at: Optional[PointTuple] = None
    points: Tuple[PointTuple, ...] = ()


@dataclass(frozen=True)
class Builtin:
    example: str
    params: Tuple[Tuple[str, Any], ...] = ()

    def kwargs(self) -> Dict[str, Any]:
        return dict(self.params)


@dataclass
class Scenario:
    name: str = "scenario"
    task: Task = Task.CERTIFY
    map: Optional[MapExpr] = None
    maps: Dict[str, MapExpr] = field(default_factory=dict)
    curves: Dict[str, Polyline] = field(default_factory=dict)
    arcs: Dict[str, ArcSpec] = field(default_factory=dict)
    points: Dict[str, PointTuple] = field(default_factory=dict)
    region: Optional[Region] = None
    region_curve: Optional[str] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    qivt: Optional[QivtSpec] = None
    outflank: Optional[OutflankSpec] = None
    angles: Tuple[AngleQuery, ...] = ()
    builtin: Optional[Builtin] = None
    generated: FrozenSet[str] = frozenset()

    def region_shape(self) -> Optional[Region]:
        if self.region_curve is not None:
            return self.curves[self.region_curve]
        return self.region

    def curve_or_arc(self, name: str) -> Polyline:
        if name in self.curves:
            return self.curves[name]
        if name in self.arcs:
            return self.arcs[name].polyline
        raise InputError(f"unknown curve or arc '{name}'")


# ============ LEXING ============
@dataclass
class _Value:
    text: str
    line: int
    column: int


@dataclass
class _Section:
    kind: str
    name: Optional[str]
    line: int
    entries: Dict[str, _Value] = field(default_factory=dict)

    def label(self) -> str:
        return f"[{self.kind}{' ' + self.name if self.name else ''}]"

    def get(self, key: str) -> Optional[_Value]:
        return self.entries.get(key)

    def need(self, key: str) -> _Value:
        value = self.entries.get(key)
        if value is None:
            raise ScenarioError(f"{self.label()} is missing '{key}'", self.line, 1)
        return value

    def check_keys(self, allowed: Sequence[str]) -> None:
        for key, value in self.entries.items():
            if key not in allowed:
                raise ScenarioError(f"unknown key '{key}' in {self.label()}", value.line, 1)


def _strip_comment(raw: str) -> str:
    at = raw.find("#")
    return raw if at < 0 else raw[:at]


def _lex(text: str) -> List[_Section]:
    sections: List[_Section] = []
    last: Optional[_Value] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        if line[0] in " \t":
            if last is None:
                raise ScenarioError("continuation line without a key", lineno, 1)
            last.text += " " + line.strip()
            continue
        header = HEADER.match(line)
        if header:
            kind, name = header.group(1).lower(), header.group(2)
            sections.append(_Section(kind, name, lineno))
            last = None
            continue
        entry = ENTRY.match(line)
        if entry is None:
            raise ScenarioError(f"expected '[section]' or 'key = value', got '{line.strip()}'", lineno, 1)
        if not sections:
            raise ScenarioError("entry before the first section header", lineno, 1)
        key = entry.group(1).lower()
        section = sections[-1]
        if key in section.entries:
            raise ScenarioError(f"duplicate key '{key}' in {section.label()}", lineno, 1)
        last = _Value(entry.group(2).strip(), lineno, entry.start(2) + 1)
        section.entries[key] = last
    return sections


# ============ VALUE PARSERS ============
def _number(tok: str, value: _Value) -> float:
    try:
        x = float(tok)
    except ValueError:
        col = value.column + max(value.text.find(tok), 0)
        raise ScenarioError(f"bad number '{tok}'", value.line, col) from None
    if not math.isfinite(x):
        raise ScenarioError(f"non-finite number '{tok}'", value.line, value.column)
    return x


def _numbers(value: _Value, count: Optional[int] = None) -> Tuple[float, ...]:
    out = tuple(_number(tok, value) for tok in value.text.replace(",", " ").split())
    if count is not None and len(out) != count:
        raise ScenarioError(f"expected {count} numbers, got {len(out)}", value.line, value.column)
    return out


def _integer(value: _Value) -> int:
    x = _number(value.text, value)
    if x != int(x):
        raise ScenarioError(f"expected an integer, got '{value.text}'", value.line, value.column)
    return int(x)


def _boolean(value: _Value) -> bool:
    word = value.text.lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ScenarioError(f"expected true or false, got '{value.text}'", value.line, value.column)


def _point(value: _Value) -> PointTuple:
    x, y = _numbers(value, 2)
    return (x, y)


def _points(value: _Value) -> Tuple[PointTuple, ...]:
    pts = []
    for chunk in value.text.split(","):
        nums = tuple(_number(tok, value) for tok in chunk.split())
        if len(nums) != 2:
            raise ScenarioError(f"expected 'x y' pairs separated by commas, got '{chunk.strip()}'",
                                value.line, value.column)
        pts.append(nums)
    return tuple(pts)


def _word(value: _Value, choices: Sequence[str]) -> str:
    word = value.text.upper()
    if word not in choices:
        raise ScenarioError(f"'{value.text}' is not one of {', '.join(choices)}", value.line, value.column)
    return word


def _guard(value: _Value, build: Callable[[], Any]) -> Any:
    """Re-raise construction errors at the line that caused them."""
    try:
        return build()
    except ScenarioError:
        raise
    except InputError as e:
        raise ScenarioError(str(e), value.line, value.column) from None


# ============ SECTION PARSERS ============
def _parse_map(sec: _Section, named: Dict[str, MapExpr]) -> MapExpr:
    kind_value = sec.need("kind")
    kind = _word(kind_value, MAP_KINDS)
    extra: Dict[str, Any] = {}
    if "domain" in sec.entries:
        extra["domain"] = _guard(sec.entries["domain"], lambda: Box(*_numbers(sec.entries["domain"], 4)))

    def build() -> MapExpr:
        if kind == "AFFINE":
            sec.check_keys(("kind", "matrix", "offset", "domain"))
            a, b, c, d = _numbers(sec.need("matrix"), 4)
            offset = _point(sec.get("offset")) if sec.get("offset") else (0.0, 0.0)
            return Affine(((a, b), (c, d)), offset, **extra)
        if kind == "COMPLEX_SCALE_ROT":
            sec.check_keys(("kind", "scale", "angle", "domain"))
            scale = _numbers(sec.get("scale"), 1)[0] if sec.get("scale") else 1.0
            return ComplexScaleRot(scale, _numbers(sec.need("angle"), 1)[0], **extra)
        if kind == "TRANSLATE":
            sec.check_keys(("kind", "vector", "domain"))
            return Translate(_point(sec.need("vector")), **extra)
        if kind == "COMPOSE":
            sec.check_keys(("kind", "factors", "domain"))
            value = sec.need("factors")
            factors = []
            for name in value.text.split():
                if name not in named:
                    raise ScenarioError(f"unknown map '{name}'", value.line, value.column + value.text.find(name))
                factors.append(named[name])
            return Compose(tuple(factors), **extra)
        if kind == "GRID_PL":
            sec.check_keys(("kind", "origin", "pitch", "shape", "dx", "dy"))
            nx, ny = _numbers(sec.need("shape"), 2)
            return GridPL(origin=_point(sec.need("origin")), pitch=_point(sec.need("pitch")),
                          shape=(int(nx), int(ny)), dx=_numbers(sec.need("dx")), dy=_numbers(sec.need("dy")))
        if kind == "FOLD":
            sec.check_keys(("kind", "n", "shear", "domain"))
            shear = _boolean(sec.get("shear")) if sec.get("shear") else True
            return FoldMap(n=_integer(sec.need("n")), shear=shear, **extra)
        sec.check_keys(("kind", "n", "beta", "domain"))
        return SpiralMap(n=_integer(sec.need("n")), beta=_numbers(sec.need("beta"), 1)[0], **extra)

    return _guard(kind_value, build)


def _parse_curve(sec: _Section) -> Polyline:
    sec.check_keys(("points", "circle", "closed"))
    closed = _boolean(sec.get("closed")) if sec.get("closed") else False
    if sec.get("circle"):
        value = sec.entries["circle"]
        nums = _numbers(value)
        if len(nums) not in (3, 4):
            raise ScenarioError("circle takes 'cx cy r [n]'", value.line, value.column)
        n = int(nums[3]) if len(nums) == 4 else 64
        return _guard(value, lambda: circle_polyline(nums[:2], nums[2], n))
    value = sec.need("points")
    return _guard(value, lambda: Polyline(_points(value), closed))


def _parse_arc(sec: _Section) -> ArcSpec:
    sec.check_keys(("points", "params"))
    value = sec.need("points")
    poly = _guard(value, lambda: Polyline(_points(value), False))
    params = _numbers(sec.entries["params"]) if sec.get("params") else None
    return ArcSpec(poly, params)


def _parse_region(sec: _Section, scn: Scenario) -> None:
    sec.check_keys(("box", "circle", "curve", "points"))
    if len(sec.entries) != 1:
        raise ScenarioError("[region] takes exactly one of box, circle, curve, points", sec.line, 1)
    key, value = next(iter(sec.entries.items()))
    if key == "box":
        scn.region = _guard(value, lambda: Box(*_numbers(value, 4)))
    elif key == "circle":
        nums = _numbers(value)
        if len(nums) not in (3, 4):
            raise ScenarioError("circle takes 'cx cy r [n]'", value.line, value.column)
        n = int(nums[3]) if len(nums) == 4 else 128
        scn.region = _guard(value, lambda: circle_polyline(nums[:2], nums[2], n))
    elif key == "points":
        scn.region = _guard(value, lambda: Polyline(_points(value), True))
    else:
        scn.region_curve = value.text


def _parse_angle(sec: _Section) -> AngleQuery:
    sec.check_keys(("kind", "curve", "at", "points"))
    kind = _word(sec.need("kind"), ANGLE_KINDS)
    at = _point(sec.entries["at"]) if sec.get("at") else None
    points = _points(sec.entries["points"]) if sec.get("points") else ()
    curve = sec.entries["curve"].text if sec.get("curve") else None
    if kind == "DIRECTED" and len(points) != 3:
        raise ScenarioError("a DIRECTED angle takes 'points = v, x, y'", sec.line, 1)
    if kind != "DIRECTED" and curve is None:
        raise ScenarioError(f"a {kind} query needs 'curve'", sec.line, 1)
    if kind in ("ROTATIONAL", "WINDING", "SIDE") and at is None:
        raise ScenarioError(f"a {kind} query needs 'at'", sec.line, 1)
    return AngleQuery(sec.name, kind, curve, at, points)


def _parse_builtin(sec: _Section) -> Builtin:
    sec.check_keys(("example", "n", "beta", "dip", "samples", "shear"))
    example = sec.need("example").text.lower().removeprefix("example_")
    if example not in ("1_2", "4_5"):
        value = sec.entries["example"]
        raise ScenarioError(f"unknown builtin example '{value.text}'", value.line, value.column)
    params: Dict[str, Any] = {}
    for key, value in sec.entries.items():
        if key in ("n", "samples"):
            params[key] = _integer(value)
        elif key in ("beta", "dip"):
            params[key] = _numbers(value, 1)[0]
        elif key == "shear":
            params[key] = _boolean(value)
    return Builtin(example, tuple(sorted(params.items())))


def _expand_builtin(scn: Scenario, line: int) -> None:
    """Fill the map, arc, point and region a builtin stanza stands for."""
    b = scn.builtin
    made = set()
    try:
        if b.example == "4_5":
            ex = example_4_5(**b.kwargs())
            if "A" not in scn.arcs:
                scn.arcs["A"] = ArcSpec(ex.arc, ex.orbit_params)
                made.add("arc:A")
            if scn.outflank is None:
                scn.outflank = OutflankSpec(arc="A")
                made.add("outflank")
        else:
            ex = example_1_2(**b.kwargs())
            if "x" not in scn.points:
                scn.points["x"] = ex.x
                made.add("point:x")
    except TypeError as e:
        raise ScenarioError(f"bad builtin parameters: {e}", line, 1) from None
    except InputError as e:
        raise ScenarioError(str(e), line, 1) from None
    if scn.map is None:
        scn.map = ex.f
        made.add("map")
    if scn.region is None and scn.region_curve is None:
        scn.region = ex.region
        made.add("region")
    scn.generated = frozenset(made)


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text into a validated Scenario."""
    sections = _lex(text)
    scn = Scenario()
    seen: Dict[str, int] = {}
    names: Dict[str, int] = {}
    builtin_line = 1
    angles = []

    for sec in sections:
        if sec.kind in SINGLE_SECTIONS or (sec.kind == "map" and sec.name is None):
            if sec.kind in seen:
                raise ScenarioError(f"duplicate {sec.label()} section", sec.line, 1)
            seen[sec.kind] = sec.line
        elif sec.kind in NAMED_SECTIONS or sec.kind == "map":
            if sec.name is None:
                raise ScenarioError(f"[{sec.kind}] needs a name", sec.line, 1)
            if sec.name in names:
                raise ScenarioError(f"name '{sec.name}' already used on line {names[sec.name]}", sec.line, 1)
            names[sec.name] = sec.line
        else:
            raise ScenarioError(f"unknown section {sec.label()}", sec.line, 1)

        if sec.kind == "scenario":
            sec.check_keys(("name", "task"))
            if sec.get("name"):
                scn.name = sec.entries["name"].text
            if sec.get("task"):
                scn.task = Task(_word(sec.entries["task"], [t.value for t in Task]))
        elif sec.kind == "tolerances":
            sec.check_keys(tuple(Tolerances().to_dict()))
            values: Dict[str, Any] = {}
            for key, value in sec.entries.items():
                values[key] = _integer(value) if key == "jitter_seed" else _numbers(value, 1)[0]
            try:
                scn.tolerances = Tolerances.from_config(**values)
            except InputError as e:
                raise ScenarioError(str(e), sec.line, 1) from None
        elif sec.kind == "map" and sec.name is None:
            scn.map = _parse_map(sec, scn.maps)
        elif sec.kind == "map":
            scn.maps[sec.name] = _parse_map(sec, scn.maps)
        elif sec.kind == "curve":
            scn.curves[sec.name] = _parse_curve(sec)
        elif sec.kind == "arc":
            scn.arcs[sec.name] = _parse_arc(sec)
        elif sec.kind == "point":
            sec.check_keys(("at",))
            scn.points[sec.name] = _point(sec.need("at"))
        elif sec.kind == "region":
            _parse_region(sec, scn)
        elif sec.kind == "qivt":
            sec.check_keys(("disc", "arc", "x", "y"))
            scn.qivt = QivtSpec(sec.need("disc").text, sec.need("arc").text,
                                _numbers(sec.need("x"), 1)[0], _numbers(sec.need("y"), 1)[0])
        elif sec.kind == "outflank":
            sec.check_keys(("arc", "start", "period"))
            scn.outflank = OutflankSpec(
                arc=sec.entries["arc"].text if sec.get("arc") else None,
                start=_point(sec.entries["start"]) if sec.get("start") else None,
                period=_integer(sec.entries["period"]) if sec.get("period") else None,
            )
            if (scn.outflank.arc is None) == (scn.outflank.start is None):
                raise ScenarioError("[outflank] takes either 'arc' or 'start' with 'period'", sec.line, 1)
            if scn.outflank.start is not None and scn.outflank.period is None:
                raise ScenarioError("[outflank] 'start' needs 'period'", sec.line, 1)
        elif sec.kind == "angle":
            angles.append(_parse_angle(sec))
        elif sec.kind == "builtin":
            scn.builtin = _parse_builtin(sec)
            builtin_line = sec.line
    scn.angles = tuple(angles)

    if scn.builtin is not None:
        _expand_builtin(scn, builtin_line)
    _check_references(scn, sections)
    LOGGER.debug(f"Parsed scenario '{scn.name}' ({scn.task.value}): {len(scn.curves)} curves, {len(scn.arcs)} arcs")
    return scn


def _check_references(scn: Scenario, sections: List[_Section]) -> None:
    def line_of(kind: str) -> int:
        return next((s.line for s in sections if s.kind == kind), 1)

    if scn.map is None and scn.task is not Task.ANGLES:
        raise ScenarioError("scenario has no [map] section", line_of("scenario"), 1)
    if scn.region_curve is not None:
        curve = scn.curves.get(scn.region_curve)
        if curve is None or not curve.closed:
            raise ScenarioError(f"region curve '{scn.region_curve}' is not a closed curve", line_of("region"), 1)
    if scn.qivt is not None:
        if scn.qivt.disc not in scn.curves:
            raise ScenarioError(f"unknown disc curve '{scn.qivt.disc}'", line_of("qivt"), 1)
        if scn.qivt.arc not in scn.arcs and scn.qivt.arc not in scn.curves:
            raise ScenarioError(f"unknown arc '{scn.qivt.arc}'", line_of("qivt"), 1)
    if scn.outflank is not None and scn.outflank.arc is not None:
        spec = scn.arcs.get(scn.outflank.arc)
        if spec is None or spec.params is None:
            raise ScenarioError(f"outflank arc '{scn.outflank.arc}' must be an [arc] with params",
                                line_of("outflank"), 1)
    for query in scn.angles:
        if query.curve is not None and query.curve not in scn.curves and query.curve not in scn.arcs:
            sec = next(s for s in sections if s.kind == "angle" and s.name == query.name)
            raise ScenarioError(f"unknown curve '{query.curve}'", sec.line, 1)
        if query.kind in ("WINDING", "SIDE", "ORIENTATION") and not (query.curve in scn.curves and scn.curves[query.curve].closed):
            sec = next(s for s in sections if s.kind == "angle" and s.name == query.name)
            raise ScenarioError(f"a {query.kind} query needs a closed curve", sec.line, 1)
        if query.kind == "ORIENTATION" and scn.map is None:
            raise ScenarioError("an ORIENTATION query needs a [map]", line_of("angle"), 1)


# ============ SERIALIZATION ============
def _num(x: float) -> str:
    return repr(float(x))


def _nums(values: Sequence[float]) -> str:
    return " ".join(_num(v) for v in values)


def _pts(points: Sequence[Sequence[float]]) -> str:
    return ", ".join(f"{_num(p[0])} {_num(p[1])}" for p in points)


def _wrapped(values: Sequence[float]) -> str:
    rows = [_nums(values[k:k + VALUES_PER_LINE]) for k in range(0, len(values), VALUES_PER_LINE)]
    return "\n    ".join(rows)


def _map_lines(m: MapExpr, maps: Dict[str, MapExpr]) -> List[str]:
    lines = [f"kind = {m.kind}"]
    if isinstance(m, Affine):
        (a, b), (c, d) = m.matrix
        lines += [f"matrix = {_nums((a, b, c, d))}", f"offset = {_nums(m.offset)}"]
    elif isinstance(m, ComplexScaleRot):
        lines += [f"scale = {_num(m.scale)}", f"angle = {_num(m.angle)}"]
    elif isinstance(m, Translate):
        lines += [f"vector = {_nums(m.vector)}"]
    elif isinstance(m, Compose):
        names = []
        for factor in m.factors:
            name = next((k for k, v in maps.items() if v == factor), None)
            if name is None:
                raise InputError(f"composition factor {factor.kind} has no [map NAME] section")
            names.append(name)
        lines += [f"factors = {' '.join(names)}"]
    elif isinstance(m, GridPL):
        lines += [f"origin = {_nums(m.origin)}", f"pitch = {_nums(m.pitch)}",
                  f"shape = {m.shape[0]} {m.shape[1]}",
                  f"dx = {_wrapped(m.dx)}", f"dy = {_wrapped(m.dy)}"]
        return lines
    elif isinstance(m, FoldMap):
        lines += [f"n = {m.n}", f"shear = {'true' if m.shear else 'false'}"]
    elif isinstance(m, SpiralMap):
        lines += [f"n = {m.n}", f"beta = {_num(m.beta)}"]
    if m.domain.is_bounded:
        lines.append(f"domain = {_nums(m.domain.as_tuple())}")
    return lines


def serialize_scenario(scn: Scenario) -> str:
    """Scenario text that parses back to an equal Scenario."""
    out: List[str] = ["[scenario]", f"name = {scn.name}", f"task = {scn.task.value}", ""]
    tol = scn.tolerances.to_dict()
    out.append("[tolerances]")
    for key, value in tol.items():
        if value is not None:
            out.append(f"{key} = {value if key == 'jitter_seed' else _num(value)}")
    out.append("")
    if scn.builtin is not None:
        out.append("[builtin]")
        out.append(f"example = {scn.builtin.example}")
        for key, value in scn.builtin.params:
            text = ("true" if value else "false") if isinstance(value, bool) else (
                str(value) if isinstance(value, int) else _num(value))
            out.append(f"{key} = {text}")
        out.append("")
    for name, m in scn.maps.items():
        out += [f"[map {name}]", *_map_lines(m, scn.maps), ""]
    if scn.map is not None and "map" not in scn.generated:
        out += ["[map]", *_map_lines(scn.map, scn.maps), ""]
    for name, curve in scn.curves.items():
        out += [f"[curve {name}]", f"closed = {'true' if curve.closed else 'false'}", f"points = {_pts(curve.vertices)}", ""]
    for name, spec in scn.arcs.items():
        if f"arc:{name}" in scn.generated:
            continue
        out += [f"[arc {name}]", f"points = {_pts(spec.polyline.vertices)}"]
        if spec.params is not None:
            out.append(f"params = {_nums(spec.params)}")
        out.append("")
    for name, p in scn.points.items():
        if f"point:{name}" not in scn.generated:
            out += [f"[point {name}]", f"at = {_nums(p)}", ""]
    if "region" not in scn.generated:
        if scn.region_curve is not None:
            out += ["[region]", f"curve = {scn.region_curve}", ""]
        elif isinstance(scn.region, Box):
            out += ["[region]", f"box = {_nums(scn.region.as_tuple())}", ""]
        elif isinstance(scn.region, Polyline):
            out += ["[region]", f"points = {_pts(scn.region.vertices)}", ""]
    if scn.qivt is not None:
        q = scn.qivt
        out += ["[qivt]", f"disc = {q.disc}", f"arc = {q.arc}", f"x = {_num(q.x)}", f"y = {_num(q.y)}", ""]
    if scn.outflank is not None and "outflank" not in scn.generated:
        o = scn.outflank
        out.append("[outflank]")
        if o.arc is not None:
            out.append(f"arc = {o.arc}")
        else:
            out += [f"start = {_nums(o.start)}", f"period = {o.period}"]
        out.append("")
    for q in scn.angles:
        out += [f"[angle {q.name}]", f"kind = {q.kind}"]
        if q.curve is not None:
            out.append(f"curve = {q.curve}")
        if q.at is not None:
            out.append(f"at = {_nums(q.at)}")
        if q.points:
            out.append(f"points = {_pts(q.points)}")
        out.append("")
    return "\n".join(out).rstrip() + "\n"


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read scenario {path}: {e}") from None
    return parse_scenario(text)


def builtin_scenario(example: str, **params: Any) -> Scenario:
    """The scenario a `[builtin]` stanza with these parameters describes."""
    lines = ["[scenario]", f"name = example_{example}", "task = CERTIFY", "", "[builtin]", f"example = {example}"]
    for key, value in params.items():
        lines.append(f"{key} = {value}")
    return parse_scenario("\n".join(lines) + "\n")
