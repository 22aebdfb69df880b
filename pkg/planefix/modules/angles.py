"""
Angles Module
Directed and rotational angles, winding numbers, orientation of embedded
circles and the left/right side predicates for directed circles and arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional

import numpy as np

from planefix import Config, LOGGER
from planefix.modules.geom import (
    Polyline,
    nearest_on_segments,
    orient2d,
    points_in_polygon,
    signed_area,
    xy,
)
from planefix.utils import (
    DegenerateAngleError,
    InputError,
    RefinementError,
    UndefinedAngleError,
    WindingResidualError,
)

TWO_PI = 2.0 * math.pi
WINDING_RESIDUAL = 1e-6


class Orientation(str, Enum):
    PRESERVING = "PRESERVING"
    REVERSING = "REVERSING"
    UNDECIDED = "UNDECIDED"


class Side(str, Enum):
    LEFT = "LEFT"
    RIGHT = "RIGHT"
    NOT_APPLICABLE = "NOT_APPLICABLE"

    def flipped(self) -> "Side":
        return {Side.LEFT: Side.RIGHT, Side.RIGHT: Side.LEFT}.get(self, self)


# ============ DIRECTED ANGLES ============
def directed_angle(v: Any, x: Any, y: Any) -> float:
    """Angle in (-pi, pi) turning ray vx onto ray vy."""
    v, x, y = xy(v), xy(x), xy(y)
    if np.array_equal(v, x) or np.array_equal(v, y):
        raise DegenerateAngleError(f"angle vertex {tuple(v)} coincides with an endpoint")
    a, b = x - v, y - v
    dot = a[0] * b[0] + a[1] * b[1]
    if orient2d(v, x, y) == 0 and dot < 0:
        raise DegenerateAngleError(f"rays from {tuple(v)} through {tuple(x)} and {tuple(y)} are opposite")
    cross = a[0] * b[1] - a[1] * b[0]
    return math.atan2(cross, dot)


def _angle_steps(v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = pts[:-1] - v
    b = pts[1:] - v
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    return np.arctan2(cross, dot)


# ============ SAMPLED PATHS ============
@dataclass
class SampledPath:
    """Parameter samples of a path; `at` resamples it, None means straight chords."""
    params: np.ndarray
    points: np.ndarray
    at: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def from_polyline(cls, p: Polyline) -> "SampledPath":
        return cls(p.params.copy(), np.array(p.loop, dtype=float))

    @classmethod
    def from_points(cls, pts: Any) -> "SampledPath":
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return cls(np.linspace(0.0, 1.0, len(pts)), pts)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], samples: int = 64) -> "SampledPath":
        ts = np.linspace(0.0, 1.0, samples + 1)
        return cls(ts, np.asarray(fn(ts), dtype=float), fn)

    def distance_to(self, v: np.ndarray) -> float:
        if len(self.points) == 1:
            return float(np.hypot(*(self.points[0] - v)))
        return float(nearest_on_segments(v[None], self.points[:-1], self.points[1:])[0][0])

    def refine(self, bad: np.ndarray) -> None:
        """Insert the midpoint of every flagged interval."""
        mids_t = 0.5 * (self.params[:-1][bad] + self.params[1:][bad])
        if self.at is None:
            mids_p = 0.5 * (self.points[:-1][bad] + self.points[1:][bad])
        else:
            mids_p = np.asarray(self.at(mids_t), dtype=float).reshape(-1, 2)
        slots = np.flatnonzero(bad) + 1
        self.params = np.insert(self.params, slots, mids_t)
        self.points = np.insert(self.points, slots, mids_p, axis=0)


def rotational_angle(
    path: Any,
    v: Any,
    min_distance: Optional[float] = None,
    max_samples: Optional[int] = None,
) -> float:
    """Total angle swept by the ray from v to a point running along the path."""
    if isinstance(path, Polyline):
        path = SampledPath.from_polyline(path)
    elif not isinstance(path, SampledPath):
        path = SampledPath.from_points(path)
    v = xy(v)
    floor = Config.EPS_SEP if min_distance is None else min_distance
    cap = max_samples or Config.MAX_SAMPLES
    if len(path.points) == 1:
        if float(np.hypot(*(path.points[0] - v))) <= floor:
            raise UndefinedAngleError(f"path is within {floor:g} of {tuple(v)}")
        return 0.0

    d = path.distance_to(v)
    while True:
        if d <= floor:
            raise UndefinedAngleError(f"path passes within {d:.3g} of {tuple(v)}")
        chords = np.hypot(*np.diff(path.points, axis=0).T)
        bad = chords >= d / 3.0
        if not bad.any():
            break
        if len(path.points) + int(bad.sum()) > cap:
            raise RefinementError(f"rotational angle needs more than {cap} samples")
        path.refine(bad)
        if path.at is not None:
            d = min(d, path.distance_to(v))
    return float(_angle_steps(v, path.points).sum())


# ============ DIRECTED CIRCLES ============
@dataclass(frozen=True)
class DirectedCircle:
    curve: Polyline
    start_vertex: int = 0
    sense: int = 1

    def __post_init__(self):
        if not self.curve.closed:
            raise InputError("a directed circle needs a closed polyline")
        if self.sense not in (1, -1):
            raise InputError("sense must be +1 or -1")
        if not 0 <= self.start_vertex < len(self.curve.vertices):
            raise InputError("start vertex out of range")

    def loop_points(self) -> np.ndarray:
        """Vertices in traversal order, closed by repeating the start vertex."""
        verts = np.roll(self.curve.array, -self.start_vertex, axis=0)
        if self.sense < 0:
            verts = np.vstack([verts[:1], verts[:0:-1]])
        return np.vstack([verts, verts[:1]])

    def reversed(self) -> "DirectedCircle":
        return DirectedCircle(self.curve, self.start_vertex, -self.sense)


@dataclass(frozen=True)
class DirectedArc:
    curve: Polyline
    start_is_first_vertex: bool = True

    def __post_init__(self):
        if self.curve.closed:
            raise InputError("a directed arc needs an open polyline")

    def points(self) -> np.ndarray:
        return np.array(self.curve.loop if self.start_is_first_vertex else self.curve.loop[::-1])


def winding_number(c: DirectedCircle, v: Any, min_distance: Optional[float] = None) -> int:
    total = rotational_angle(SampledPath.from_points(c.loop_points()), v, min_distance)
    turns = total / TWO_PI
    w = round(turns)
    if abs(turns - w) >= WINDING_RESIDUAL:
        raise WindingResidualError(f"winding residual {abs(turns - w):.3g} around {tuple(xy(v))}")
    return int(w)


def interior_point(curve: Polyline) -> np.ndarray:
    """A point inside a simple closed polyline, on a scanline through its widest gap between vertex heights."""
    if not curve.closed:
        raise InputError("interior point needs a closed polyline")
    V = curve.array
    ys = np.unique(V[:, 1])
    gaps = np.diff(ys)
    k = int(np.argmax(gaps))
    y0 = 0.5 * (ys[k] + ys[k + 1])
    A, B = V, np.roll(V, -1, axis=0)
    crosses = (A[:, 1] > y0) != (B[:, 1] > y0)
    xs = np.sort(A[crosses, 0] + (y0 - A[crosses, 1]) * (B[crosses, 0] - A[crosses, 0]) / (B[crosses, 1] - A[crosses, 1]))
    if len(xs) < 2:
        raise InputError("closed polyline has no interior")
    widths = xs[1::2] - xs[0::2]
    j = int(np.argmax(widths))
    return np.array([0.5 * (xs[2 * j] + xs[2 * j + 1]), y0])


def overall_sense(curve: Polyline) -> int:
    """+1 when the parameter order runs anticlockwise, -1 otherwise."""
    p = interior_point(curve)
    clearance = float(curve.distance_many(p[None])[0])
    w = winding_number(DirectedCircle(curve), p, min_distance=0.5 * clearance)
    if w == 0:
        raise InputError("closed polyline is not simple: interior point has winding zero")
    area = signed_area(curve.array)
    if (area > 0) != (w > 0):
        LOGGER.warning(f"⚠️ shoelace sign {area:+.3g} disagrees with winding {w}; trusting the winding")
    return 1 if w > 0 else -1


def orientation_of_embedding(
    c: DirectedCircle,
    image: DirectedCircle,
    v: Optional[Any] = None,
    w: Optional[Any] = None,
) -> Orientation:
    """Compare the full rotational angles of a circle and its image around interior points."""
    v = interior_point(c.curve) if v is None else xy(v)
    w = interior_point(image.curve) if w is None else xy(w)
    tol_v = 0.5 * float(c.curve.distance_many(v[None])[0])
    tol_w = 0.5 * float(image.curve.distance_many(w[None])[0])
    wc = winding_number(c, v, tol_v)
    wi = winding_number(image, w, tol_w)
    if wc == 0 or wi == 0:
        raise InputError("reference points must lie inside their circles")
    product = (TWO_PI * wc) * (TWO_PI * wi)
    return Orientation.PRESERVING if product > 0 else Orientation.REVERSING


def side_of_directed_circle(c: DirectedCircle, p: Any, on_curve_tol: float = 0.0) -> Side:
    p = xy(p)
    dist = float(c.curve.distance_many(p[None])[0])
    if dist <= on_curve_tol or dist == 0.0:
        raise InputError(f"point {tuple(p)} lies on the circle")
    w = winding_number(c, p, min_distance=0.5 * dist)
    if w != 0:
        return Side.LEFT if w > 0 else Side.RIGHT
    anticlockwise = overall_sense(c.curve) * c.sense > 0
    return Side.RIGHT if anticlockwise else Side.LEFT


def side_of_directed_arc(a: DirectedArc, d: DirectedCircle, on_curve_tol: Optional[float] = None) -> Side:
    """Side of the disc bounded by d relative to the directed arc, when they share exactly one subarc."""
    pts_arc = a.points()
    C = d.curve
    scale = max(C.bbox.diameter, Polyline.from_array(pts_arc).bbox.diameter, 1.0)
    tol = 1e-9 * scale if on_curve_tol is None else on_curve_tol
    step = min(C.length, Polyline.from_array(pts_arc).length) / 512.0
    samples, _ = Polyline.from_array(pts_arc).densify(step)

    dist = C.distance_many(samples)
    on = dist <= tol
    inside = points_in_polygon(C.array, samples) & ~on
    if inside.any():
        LOGGER.debug("Arc enters the disc interior; side undefined")
        return Side.NOT_APPLICABLE
    runs = np.flatnonzero(np.diff(np.concatenate([[0], on.astype(np.int8), [0]])))
    if len(runs) != 2:
        LOGGER.debug(f"Arc meets the circle in {len(runs) // 2} runs; side undefined")
        return Side.NOT_APPLICABLE
    start, stop = runs
    if start == 0 or stop == len(samples) or stop - start < 2:
        return Side.NOT_APPLICABLE

    mid = (start + stop - 1) // 2
    lo, hi = max(start, mid - 1), min(stop - 1, mid + 1)
    tangent = samples[hi] - samples[lo]
    A, B = C.segments()
    _, k, _ = nearest_on_segments(samples[mid][None], A, B)
    circle_dir = B[k[0]] - A[k[0]]
    along = 1 if float(tangent @ circle_dir) > 0 else -1
    anticlockwise = overall_sense(C) * along > 0
    return Side.LEFT if anticlockwise else Side.RIGHT


def circle_polyline(center: Any = (0.0, 0.0), radius: float = 1.0, n: int = 64) -> Polyline:
    """Anticlockwise regular n-gon inscribed in a circle."""
    c = xy(center)
    th = TWO_PI * np.arange(n) / n
    return Polyline.from_array(c + radius * np.stack([np.cos(th), np.sin(th)], axis=1), closed=True)

