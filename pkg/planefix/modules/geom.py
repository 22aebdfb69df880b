"""
Geometry Module
Robust planar primitives: points, boxes, simple polylines with an arclength
parameter, exact segment intersection, and the grid decomposition of the
complement of a curve union into connected faces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from planefix import Config, LOGGER
from planefix.utils import InputError, PointTuple, ResolutionError

ON_CURVE = -1

# Shewchuk's static filter for the 2x2 orientation determinant
EPSILON = 2.0 ** -53
CCW_ERRBOUND_A = (3.0 + 16.0 * EPSILON) * EPSILON

PAIR_CHUNK = 1 << 22


# ============ POINTS AND BOXES ============
@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InputError(f"point ({self.x}, {self.y}) is not finite")

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def __len__(self) -> int:
        return 2

    def __getitem__(self, i: int) -> float:
        return (self.x, self.y)[i]

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.array([self.x, self.y], dtype=dtype or float)


def xy(p: Any) -> np.ndarray:
    return np.asarray(p, dtype=float).reshape(2)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box. Infinite bounds are allowed only for map domains."""
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if any(math.isnan(v) for v in vals):
            raise InputError("box bounds must not be NaN")
        if self.xmin > self.xmax or self.ymin > self.ymax:
            raise InputError(f"empty box {vals}")

    @classmethod
    def everywhere(cls) -> "Box":
        return cls(-math.inf, -math.inf, math.inf, math.inf)

    @classmethod
    def around(cls, points: Any, margin: float = 0.0) -> "Box":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        lo = pts.min(axis=0) - margin
        hi = pts.max(axis=0) + margin
        return cls(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def is_bounded(self) -> bool:
        return all(math.isfinite(v) for v in (self.xmin, self.ymin, self.xmax, self.ymax))

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> PointTuple:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    @property
    def lower_left(self) -> PointTuple:
        return (self.xmin, self.ymin)

    def contains(self, p: Any, pad: float = 0.0) -> bool:
        x, y = xy(p)
        return (self.xmin - pad <= x <= self.xmax + pad) and (self.ymin - pad <= y <= self.ymax + pad)

    def contains_many(self, pts: np.ndarray, pad: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return (
            (pts[:, 0] >= self.xmin - pad) & (pts[:, 0] <= self.xmax + pad)
            & (pts[:, 1] >= self.ymin - pad) & (pts[:, 1] <= self.ymax + pad)
        )

    def contains_box(self, other: "Box") -> bool:
        return (self.xmin <= other.xmin and self.ymin <= other.ymin
                and other.xmax <= self.xmax and other.ymax <= self.ymax)

    def expanded(self, margin: float) -> "Box":
        return Box(self.xmin - margin, self.ymin - margin, self.xmax + margin, self.ymax + margin)

    def union(self, other: "Box") -> "Box":
        return Box(min(self.xmin, other.xmin), min(self.ymin, other.ymin),
                   max(self.xmax, other.xmax), max(self.ymax, other.ymax))

    def split(self, at: Optional[float] = None) -> Tuple["Box", "Box"]:
        """Bisect along the longer axis, optionally at a given coordinate."""
        if self.width >= self.height:
            cut = 0.5 * (self.xmin + self.xmax) if at is None else at
            return Box(self.xmin, self.ymin, cut, self.ymax), Box(cut, self.ymin, self.xmax, self.ymax)
        cut = 0.5 * (self.ymin + self.ymax) if at is None else at
        return Box(self.xmin, self.ymin, self.xmax, cut), Box(self.xmin, cut, self.xmax, self.ymax)

    def corners(self) -> np.ndarray:
        """Counterclockwise corners starting at the lower-left corner."""
        return np.array([
            [self.xmin, self.ymin], [self.xmax, self.ymin],
            [self.xmax, self.ymax], [self.xmin, self.ymax],
        ])

    def boundary(self) -> "Polyline":
        return Polyline.from_array(self.corners(), closed=True)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


# ============ TOLERANCES ============
@dataclass(frozen=True)
class Tolerances:
    eps_sep: float = Config.EPS_SEP
    h_sample: float = Config.H_SAMPLE
    tol_fix: float = Config.TOL_FIX
    grid_pitch: float = Config.GRID_PITCH
    tube_factor: float = Config.TUBE_FACTOR
    injectivity_radius: float = Config.INJECTIVITY_RADIUS
    jitter_seed: Optional[int] = Config.SEED_JITTER

    def __post_init__(self):
        for name in ("eps_sep", "h_sample", "tol_fix", "grid_pitch", "injectivity_radius"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InputError(f"tolerance {name} must be positive, got {value}")
        if self.tube_factor < 1:
            raise InputError("tube_factor must be at least 1")

    @classmethod
    def from_config(cls, **overrides: Any) -> "Tolerances":
        return cls(**{k: v for k, v in overrides.items() if v is not None})

    @property
    def tube(self) -> float:
        return self.tube_factor * self.eps_sep

    def check_lipschitz(self, lipschitz: Optional[float], where: str = "map") -> None:
        if lipschitz is None:
            return
        if not self.eps_sep > 2.0 * self.h_sample * lipschitz:
            raise InputError(
                f"eps_sep={self.eps_sep} must exceed 2*h_sample*L = {2.0 * self.h_sample * lipschitz:.6g} for {where}"
            )

    def with_(self, **changes: Any) -> "Tolerances":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps_sep": self.eps_sep,
            "h_sample": self.h_sample,
            "tol_fix": self.tol_fix,
            "grid_pitch": self.grid_pitch,
            "tube_factor": self.tube_factor,
            "injectivity_radius": self.injectivity_radius,
            "jitter_seed": self.jitter_seed,
        }


# ============ EXACT PREDICATES ============
def _orient_exact(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> int:
    ax, ay, bx, by, cx, cy = (Fraction(float(v)) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient2d(a: Any, b: Any, c: Any) -> int:
    """Sign of the turn a -> b -> c: +1 counterclockwise, -1 clockwise, 0 collinear. Exact."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    errbound = CCW_ERRBOUND_A * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _orient_exact((ax, ay), (bx, by), (cx, cy))


def orient2d_many(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    C = np.asarray(C, dtype=float).reshape(-1, 2)
    detleft = (A[:, 0] - C[:, 0]) * (B[:, 1] - C[:, 1])
    detright = (A[:, 1] - C[:, 1]) * (B[:, 0] - C[:, 0])
    det = detleft - detright
    errbound = CCW_ERRBOUND_A * (np.abs(detleft) + np.abs(detright))
    sign = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= errbound
    for k in np.flatnonzero(unsure):
        sign[k] = _orient_exact(A[k], B[k], C[k])
    return sign


def _between(P: np.ndarray, Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    return (
        (np.minimum(P[:, 0], Q[:, 0]) <= R[:, 0]) & (R[:, 0] <= np.maximum(P[:, 0], Q[:, 0]))
        & (np.minimum(P[:, 1], Q[:, 1]) <= R[:, 1]) & (R[:, 1] <= np.maximum(P[:, 1], Q[:, 1]))
    )


def segments_intersect_many(A1: np.ndarray, B1: np.ndarray, A2: np.ndarray, B2: np.ndarray) -> np.ndarray:
    """Closed-segment intersection test, exact, elementwise."""
    d1 = orient2d_many(A2, B2, A1)
    d2 = orient2d_many(A2, B2, B1)
    d3 = orient2d_many(A1, B1, A2)
    d4 = orient2d_many(A1, B1, B2)
    proper = (d1.astype(int) * d2 < 0) & (d3.astype(int) * d4 < 0)
    touch = (
        ((d1 == 0) & _between(A2, B2, A1))
        | ((d2 == 0) & _between(A2, B2, B1))
        | ((d3 == 0) & _between(A1, B1, A2))
        | ((d4 == 0) & _between(A1, B1, B2))
    )
    return proper | touch


def segments_intersect(p1: Any, p2: Any, q1: Any, q2: Any) -> bool:
    return bool(segments_intersect_many(
        xy(p1)[None], xy(p2)[None], xy(q1)[None], xy(q2)[None])[0])


def find_crossings(A1: np.ndarray, B1: np.ndarray, A2: np.ndarray, B2: np.ndarray) -> np.ndarray:
    """All index pairs (i, j) with segment i of the first set meeting segment j of the second."""
    if len(A1) == 0 or len(A2) == 0:
        return np.zeros((0, 2), dtype=int)
    lo1, hi1 = np.minimum(A1, B1), np.maximum(A1, B1)
    lo2, hi2 = np.minimum(A2, B2), np.maximum(A2, B2)
    chunk = max(1, PAIR_CHUNK // max(len(A2), 1))
    found: List[np.ndarray] = []
    for s in range(0, len(A1), chunk):
        l, h = lo1[s:s + chunk], hi1[s:s + chunk]
        overlap = (
            (l[:, None, 0] <= hi2[None, :, 0]) & (lo2[None, :, 0] <= h[:, None, 0])
            & (l[:, None, 1] <= hi2[None, :, 1]) & (lo2[None, :, 1] <= h[:, None, 1])
        )
        ii, jj = np.nonzero(overlap)
        if ii.size == 0:
            continue
        ii = ii + s
        hit = segments_intersect_many(A1[ii], B1[ii], A2[jj], B2[jj])
        if hit.any():
            found.append(np.stack([ii[hit], jj[hit]], axis=1))
    if not found:
        return np.zeros((0, 2), dtype=int)
    pairs = np.concatenate(found)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def intersection_point(p1: Any, p2: Any, q1: Any, q2: Any) -> Tuple[np.ndarray, float, float]:
    """Crossing point of two non-parallel segments with its parameters on each."""
    p1, p2, q1, q2 = xy(p1), xy(p2), xy(q1), xy(q2)
    r, s = p2 - p1, q2 - q1
    denom = r[0] * s[1] - r[1] * s[0]
    if denom == 0.0:
        # collinear overlap: report the first shared endpoint
        for cand in (q1, q2, p1, p2):
            if _between(p1[None], p2[None], cand[None])[0] and _between(q1[None], q2[None], cand[None])[0]:
                return cand.copy(), _param_on(p1, p2, cand), _param_on(q1, q2, cand)
        raise InputError("segments do not intersect")
    qp = q1 - p1
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    return p1 + t * r, float(t), float(u)


def _param_on(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> float:
    d = b - a
    n = float(d @ d)
    return 0.0 if n == 0.0 else float(np.clip((p - a) @ d / n, 0.0, 1.0))


# ============ DISTANCES ============
def nearest_on_segments(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every point: distance to the nearest segment, its index and the foot parameter on it."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    n = len(P)
    if len(A) == 0:
        return np.full(n, np.inf), np.full(n, -1), np.zeros(n)
    D = B - A
    dd = np.einsum("ij,ij->i", D, D)
    dd_safe = np.where(dd > 0, dd, 1.0)
    dist = np.empty(n)
    index = np.empty(n, dtype=int)
    param = np.empty(n)
    chunk = max(1, PAIR_CHUNK // max(len(A), 1))
    for s in range(0, n, chunk):
        Q = P[s:s + chunk]
        rel = Q[:, None, :] - A[None, :, :]
        t = np.clip(np.einsum("nmk,mk->nm", rel, D) / dd_safe[None, :], 0.0, 1.0)
        t = np.where(dd[None, :] > 0, t, 0.0)
        diff = rel - t[:, :, None] * D[None, :, :]
        d2 = np.einsum("nmk,nmk->nm", diff, diff)
        k = np.argmin(d2, axis=1)
        rows = np.arange(len(Q))
        dist[s:s + chunk] = np.sqrt(d2[rows, k])
        index[s:s + chunk] = k
        param[s:s + chunk] = t[rows, k]
    return dist, index, param


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area of a closed vertex loop; positive when counterclockwise."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def points_in_polygon(vertices: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Crossing-number membership of many points in a closed vertex loop."""
    V = np.asarray(vertices, dtype=float)
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    inside = np.zeros(len(P), dtype=bool)
    x, y = P[:, 0], P[:, 1]
    for a, b in zip(V, np.roll(V, -1, axis=0)):
        if a[1] == b[1]:
            continue
        crosses = (a[1] > y) != (b[1] > y)
        xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        inside ^= crosses & (x < xc)
    return inside


# ============ POLYLINES ============
@dataclass(frozen=True, eq=False)
class Polyline:
    """Polygonal curve: open (arc) or closed (circle); parameter = normalized arclength.

    A single-vertex open polyline is the degenerate subarc [x, x].
    Simplicity is not enforced on construction; use is_simple.
    """
    vertices: Tuple[PointTuple, ...]
    closed: bool = False

    def __post_init__(self):
        verts = tuple((float(p[0]), float(p[1])) for p in self.vertices)
        if any(not (math.isfinite(x) and math.isfinite(y)) for x, y in verts):
            raise InputError("polyline vertices must be finite")
        if self.closed and len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        for k in range(1, len(verts)):
            if verts[k] == verts[k - 1]:
                raise InputError(f"consecutive vertices {k - 1} and {k} coincide")
        if self.closed and len(verts) < 3:
            raise InputError("a closed polyline needs at least 3 vertices")
        if not verts:
            raise InputError("a polyline needs at least one vertex")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def from_array(cls, arr: Any, closed: bool = False) -> "Polyline":
        a = np.asarray(arr, dtype=float).reshape(-1, 2)
        if len(a) > 1:
            keep = np.ones(len(a), dtype=bool)
            keep[1:] = np.any(a[1:] != a[:-1], axis=1)
            a = a[keep]
        if closed and len(a) > 1 and np.array_equal(a[0], a[-1]):
            a = a[:-1]
        return cls(tuple(map(tuple, a)), closed)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polyline) and self.closed == other.closed and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash((self.vertices, self.closed))

    def __len__(self) -> int:
        return len(self.vertices)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.vertices, dtype=float).reshape(-1, 2)
        a.setflags(write=False)
        return a

    @cached_property
    def loop(self) -> np.ndarray:
        """Vertices in traversal order, with the first vertex repeated at the end when closed."""
        a = np.vstack([self.array, self.array[:1]]) if self.closed else self.array
        a.setflags(write=False)
        return a

    @property
    def is_point(self) -> bool:
        return len(self.vertices) == 1

    @property
    def start(self) -> np.ndarray:
        return self.loop[0]

    @property
    def end(self) -> np.ndarray:
        return self.loop[-1]

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.loop[:-1], self.loop[1:]

    @cached_property
    def seg_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.loop, axis=0).T) if len(self.loop) > 1 else np.zeros(0)

    @property
    def length(self) -> float:
        return float(self.seg_lengths.sum())

    @cached_property
    def params(self) -> np.ndarray:
        """Normalized arclength parameter of every loop vertex."""
        if len(self.loop) == 1:
            return np.zeros(1)
        cum = np.concatenate([[0.0], np.cumsum(self.seg_lengths)])
        cum /= cum[-1]
        cum[-1] = 1.0
        return cum

    @property
    def bbox(self) -> Box:
        return Box.around(self.array)

    def points_at(self, ts: Any) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if np.any((ts < 0) | (ts > 1)):
            raise InputError("arc parameter outside [0, 1]")
        loop, cum = self.loop, self.params
        if len(loop) == 1:
            return np.repeat(loop, len(ts), axis=0)
        i = np.clip(np.searchsorted(cum, ts, side="right") - 1, 0, len(cum) - 2)
        span = cum[i + 1] - cum[i]
        local = np.where(span > 0, (ts - cum[i]) / np.where(span > 0, span, 1.0), 0.0)
        out = loop[i] + local[:, None] * (loop[i + 1] - loop[i])
        out[ts >= 1.0] = loop[-1]
        return out

    def point_at(self, t: float) -> np.ndarray:
        return self.points_at([t])[0]

    def project(self, p: Any) -> Tuple[float, float]:
        """Parameter of the nearest point on the curve and the distance to it."""
        ts, dist = self.project_many(xy(p)[None])
        return float(ts[0]), float(dist[0])

    def project_many(self, P: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        if self.is_point:
            return np.zeros(len(P)), np.hypot(*(P - self.loop[0]).T)
        A, B = self.segments()
        dist, k, s = nearest_on_segments(P, A, B)
        cum = self.params
        return cum[k] + s * (cum[k + 1] - cum[k]), dist

    def distance_many(self, P: np.ndarray) -> np.ndarray:
        return self.project_many(P)[1]

    def densify(self, step: float) -> Tuple[np.ndarray, np.ndarray]:
        """Points at spacing at most `step` including every vertex, with their parameters."""
        if step <= 0:
            raise InputError("densify step must be positive")
        loop, cum = self.loop, self.params
        if len(loop) == 1:
            return loop.copy(), np.zeros(1)
        pts, ts = [], []
        for k, seglen in enumerate(self.seg_lengths):
            pieces = max(1, int(math.ceil(seglen / step)))
            f = np.arange(pieces) / pieces
            pts.append(loop[k] + f[:, None] * (loop[k + 1] - loop[k]))
            ts.append(cum[k] + f * (cum[k + 1] - cum[k]))
        pts.append(loop[-1:])
        ts.append([1.0])
        return np.vstack(pts), np.concatenate(ts)

    def reversed(self) -> "Polyline":
        if self.closed:
            return Polyline((self.vertices[0],) + tuple(reversed(self.vertices[1:])), True)
        return Polyline(tuple(reversed(self.vertices)), False)

    def transformed(self, fn) -> "Polyline":
        """Apply a vectorized point map to every vertex."""
        return Polyline.from_array(fn(self.array), self.closed)


def is_simple(p: Polyline) -> Tuple[bool, Optional[Tuple[int, int]]]:
    """Simplicity test; returns the first violating segment pair (by index) when not simple."""
    if len(p.vertices) < 2:
        raise InputError("is_simple needs at least 2 vertices")
    A, B = p.segments()
    m = len(A)
    adjacent = [(k, k + 1) for k in range(m - 1)]
    if p.closed:
        adjacent.append((m - 1, 0))
    for i, j in adjacent:
        a, b, c = A[i], B[i], B[j]
        if orient2d(a, b, c) == 0 and float(np.dot(b - a, c - b)) < 0:
            return False, (min(i, j), max(i, j))
    pairs = find_crossings(A, B, A, B)
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        keep = j > i + 1
        if p.closed:
            keep &= ~((i == 0) & (j == m - 1))
        pairs = pairs[keep]
        if len(pairs):
            return False, (int(pairs[0, 0]), int(pairs[0, 1]))
    return True, None


def subarc(host: Polyline, t1: float, t2: float) -> Polyline:
    """Subcurve between two parameters; a single point when t1 == t2."""
    a, b = sorted((float(t1), float(t2)))
    if a < 0 or b > 1:
        raise InputError(f"subarc parameters ({t1}, {t2}) outside [0, 1]")
    if a == b:
        return Polyline((tuple(host.point_at(a)),))
    cum = host.params
    inner = host.loop[(cum > a) & (cum < b)]
    pts = np.vstack([host.point_at(a)[None], inner, host.point_at(b)[None]])
    return Polyline.from_array(pts)


def concat_polylines(parts: Sequence[Polyline], closed: bool = False) -> Polyline:
    """Join arcs end to start, dropping the duplicated junction vertices."""
    chunks = [parts[0].loop]
    for part in parts[1:]:
        loop = part.loop
        if np.allclose(chunks[-1][-1], loop[0], rtol=0, atol=1e-12):
            loop = loop[1:]
        chunks.append(loop)
    return Polyline.from_array(np.vstack(chunks), closed=closed)


# ============ CURVE SETS ============
class CurveSet:
    """All segments of a curve union, for distance and exact crossing queries."""

    def __init__(self, curves: Iterable[Polyline]):
        starts, ends = [], []
        points = []
        for c in curves:
            if c.is_point:
                points.append(c.loop[0])
                continue
            A, B = c.segments()
            starts.append(A)
            ends.append(B)
        self.A = np.vstack(starts) if starts else np.zeros((0, 2))
        self.B = np.vstack(ends) if ends else np.zeros((0, 2))
        if points:
            pts = np.array(points)
            self.A = np.vstack([self.A, pts])
            self.B = np.vstack([self.B, pts])
        self.lo = np.minimum(self.A, self.B)
        self.hi = np.maximum(self.A, self.B)

    @property
    def size(self) -> int:
        return len(self.A)

    @property
    def bbox(self) -> Optional[Box]:
        if not self.size:
            return None
        return Box.around(np.vstack([self.lo, self.hi]))

    def distance(self, P: np.ndarray) -> np.ndarray:
        return nearest_on_segments(P, self.A, self.B)[0]

    def crosses(self, p: Any, q: Any) -> bool:
        """Exact: does the closed segment pq meet any curve segment?"""
        p, q = xy(p), xy(q)
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        cand = np.flatnonzero(
            (self.lo[:, 0] <= hi[0]) & (lo[0] <= self.hi[:, 0])
            & (self.lo[:, 1] <= hi[1]) & (lo[1] <= self.hi[:, 1])
        )
        if cand.size == 0:
            return False
        n = cand.size
        hit = segments_intersect_many(np.repeat(p[None], n, 0), np.repeat(q[None], n, 0), self.A[cand], self.B[cand])
        return bool(hit.any())


# ============ COMPLEMENT DECOMPOSITION ============
@dataclass(frozen=True)
class Face:
    index: int
    representative: PointTuple
    bounded: bool
    cells: int
    clearance: float
    low_confidence: bool


@dataclass(frozen=True, eq=False)
class ComplementDecomposition:
    curves: Tuple[Polyline, ...]
    faces: Tuple[Face, ...]
    resolution: float
    box: Box
    eps_sep: float
    origin: PointTuple
    pitch: float
    face_grid: np.ndarray = field(repr=False)
    clearance: np.ndarray = field(repr=False)
    curveset: CurveSet = field(repr=False)

    @property
    def unbounded_index(self) -> int:
        return next(f.index for f in self.faces if not f.bounded)

    def bounded_faces(self) -> List[Face]:
        return [f for f in self.faces if f.bounded]

    def face_mask(self, index: int) -> np.ndarray:
        return self.face_grid == index

    def face_bbox(self, index: int) -> Box:
        """Box covering every cell of the face, grown by one cell."""
        rows, cols = np.nonzero(self.face_mask(index))
        if rows.size == 0:
            raise InputError(f"face {index} has no cells")
        h = self.pitch
        x0, y0 = self.origin
        return Box(x0 + (cols.min() - 1) * h, y0 + (rows.min() - 1) * h,
                   x0 + (cols.max() + 2) * h, y0 + (rows.max() + 2) * h)

    def face_runs(self, index: int) -> List[Tuple[float, float, float, float]]:
        """Row runs of the face's cells as (x, y, width, height) rectangles."""
        mask = self.face_mask(index)
        h = self.pitch
        x0, y0 = self.origin
        runs = []
        for row in np.flatnonzero(mask.any(axis=1)):
            line = np.concatenate([[False], mask[row], [False]]).astype(np.int8)
            edges = np.flatnonzero(np.diff(line))
            for start, stop in zip(edges[::2], edges[1::2]):
                runs.append((x0 + start * h, y0 + row * h, (stop - start) * h, h))
        return runs


def decompose_complement(
    curves: Sequence[Polyline],
    box: Box,
    resolution: float,
    eps_sep: Optional[float] = None,
) -> ComplementDecomposition:
    """Faces of box minus the curve union, by flood fill at pitch resolution/4 with exact checks."""
    if resolution <= 0:
        raise InputError("resolution must be positive")
    curves = tuple(curves)
    cs = CurveSet(curves)
    if cs.size and not box.contains_box(cs.bbox.expanded(resolution)):
        raise InputError("box must contain all curves with a margin of at least the resolution")

    h = resolution / 4.0
    nx = max(3, int(math.ceil(box.width / h)))
    ny = max(3, int(math.ceil(box.height / h)))
    x0, y0 = box.xmin, box.ymin
    guard = 0.5 * h * (1.0 + 1e-9)

    blocked = np.zeros((ny, nx), dtype=bool)
    for a, b in zip(cs.A, cs.B):
        seglen = float(np.hypot(*(b - a)))
        pieces = max(1, int(math.ceil(seglen / (4.0 * h))))
        for k in range(pieces):
            p = a + (b - a) * (k / pieces)
            q = a + (b - a) * ((k + 1) / pieces)
            lo, hi = np.minimum(p, q) - guard, np.maximum(p, q) + guard
            i0 = max(0, int(math.floor((lo[0] - x0) / h - 0.5)))
            i1 = min(nx - 1, int(math.ceil((hi[0] - x0) / h - 0.5)))
            j0 = max(0, int(math.floor((lo[1] - y0) / h - 0.5)))
            j1 = min(ny - 1, int(math.ceil((hi[1] - y0) / h - 0.5)))
            if i1 < i0 or j1 < j0:
                continue
            gx, gy = np.meshgrid(x0 + (np.arange(i0, i1 + 1) + 0.5) * h, y0 + (np.arange(j0, j1 + 1) + 0.5) * h)
            centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
            d = nearest_on_segments(centers, p[None], q[None])[0].reshape(gx.shape)
            blocked[j0:j1 + 1, i0:i1 + 1] |= d <= guard

    free = ~blocked
    clearance = ndimage.distance_transform_edt(free) * h if blocked.any() else np.full(free.shape, np.inf)

    def center(i: int, j: int) -> np.ndarray:
        return np.array([x0 + (i + 0.5) * h, y0 + (j + 0.5) * h])

    node = np.full(free.shape, -1, dtype=np.int64)
    node[free] = np.arange(int(free.sum()))
    edges_i, edges_j = [], []
    for axis in (1, 0):
        if axis == 1:
            a_mask = free[:, :-1] & free[:, 1:]
            na, nb = node[:, :-1][a_mask], node[:, 1:][a_mask]
            near = (np.minimum(clearance[:, :-1], clearance[:, 1:]) <= 1.5 * h)[a_mask]
            rows, cols = np.nonzero(a_mask)
            step = (1, 0)
        else:
            a_mask = free[:-1, :] & free[1:, :]
            na, nb = node[:-1, :][a_mask], node[1:, :][a_mask]
            near = (np.minimum(clearance[:-1, :], clearance[1:, :]) <= 1.5 * h)[a_mask]
            rows, cols = np.nonzero(a_mask)
            step = (0, 1)
        keep = np.ones(na.size, dtype=bool)
        for k in np.flatnonzero(near):
            j, i = rows[k], cols[k]
            if cs.crosses(center(i, j), center(i + step[0], j + step[1])):
                keep[k] = False
        if not keep.all():
            LOGGER.warning(f"⚠️ {int((~keep).sum())} grid edges crossed a curve and were cut")
        edges_i.append(na[keep])
        edges_j.append(nb[keep])

    n_free = int(free.sum())
    ei = np.concatenate(edges_i)
    ej = np.concatenate(edges_j)
    graph = coo_matrix((np.ones(ei.size, dtype=np.int8), (ei, ej)), shape=(n_free, n_free))
    _, labels = connected_components(graph, directed=False)

    # components numbered by their first cell in row-major order
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    labels = rank[labels]

    comp = np.full(free.shape, -1, dtype=np.int64)
    comp[free] = labels
    outer = comp[0, 0]
    border = np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]])
    if np.any(border != outer):
        raise ResolutionError("box border is not one connected region; enlarge the box margin")

    n_comp = int(labels.max()) + 1
    label_grid = comp + 1
    index = np.arange(1, n_comp + 1)
    max_clear = np.asarray(ndimage.maximum(clearance, labels=label_grid, index=index), dtype=float)
    positions = ndimage.maximum_position(clearance, labels=label_grid, index=index)
    counts = np.bincount(labels, minlength=n_comp)

    faces: List[Face] = []
    face_grid = np.full(free.shape, -1, dtype=np.int64)
    for c in range(n_comp):
        if c != outer and max_clear[c] < h:
            LOGGER.debug(f"Dropping sliver component {c} ({counts[c]} cells)")
            continue
        j, i = positions[c]
        rep = center(int(i), int(j))
        idx = len(faces)
        faces.append(Face(
            index=idx,
            representative=(float(rep[0]), float(rep[1])),
            bounded=bool(c != outer),
            cells=int(counts[c]),
            clearance=float(max_clear[c]) if math.isfinite(max_clear[c]) else float(box.diameter),
            low_confidence=bool(max_clear[c] < resolution),
        ))
        face_grid[comp == c] = idx

    _check_pinches(comp, blocked, cs, center)

    face_grid.setflags(write=False)
    clearance.setflags(write=False)
    LOGGER.debug(
        f"Complement of {len(curves)} curves: {len(faces)} faces "
        f"({sum(f.bounded for f in faces)} bounded) on a {nx}x{ny} grid"
    )
    return ComplementDecomposition(
        curves=curves,
        faces=tuple(faces),
        resolution=float(resolution),
        box=box,
        eps_sep=float(eps_sep if eps_sep is not None else resolution / 4.0),
        origin=(x0, y0),
        pitch=h,
        face_grid=face_grid,
        clearance=clearance,
        curveset=cs,
    )


def _check_pinches(comp: np.ndarray, blocked: np.ndarray, cs: CurveSet, center) -> None:
    """Free cells two apart across a blocked cell must be separated by a curve when labelled differently.

    Every occurrence is checked: one crossing between two components does not rule out a pinch elsewhere.
    """
    for axis in (1, 0):
        if axis == 1:
            a, mid, b = comp[:, :-2], blocked[:, 1:-1], comp[:, 2:]
            step = (2, 0)
        else:
            a, mid, b = comp[:-2, :], blocked[1:-1, :], comp[2:, :]
            step = (0, 2)
        mask = (a >= 0) & (b >= 0) & mid & (a != b)
        for j, i in zip(*np.nonzero(mask)):
            key = (min(a[j, i], b[j, i]), max(a[j, i], b[j, i]))
            if not cs.crosses(center(i, j), center(i + step[0], j + step[1])):
                raise ResolutionError(
                    f"components {key[0]} and {key[1]} touch through a pinch narrower than the grid; refine the resolution"
                )


def point_in_face(d: ComplementDecomposition, p: Any, on_curve_tol: Optional[float] = None) -> int:
    """Face index containing p, or ON_CURVE when within the tolerance of a curve."""
    p = xy(p)
    tol = d.eps_sep if on_curve_tol is None else on_curve_tol
    if d.curveset.size and float(d.curveset.distance(p[None])[0]) <= tol:
        return ON_CURVE
    h = d.pitch
    ny, nx = d.face_grid.shape
    i = int(np.clip(math.floor((p[0] - d.origin[0]) / h), 0, nx - 1))
    j = int(np.clip(math.floor((p[1] - d.origin[1]) / h), 0, ny - 1))
    if d.face_grid[j, i] >= 0 and d.clearance[j, i] >= 2.0 * h:
        return int(d.face_grid[j, i])
    for radius in (1, 3, 6):
        j0, j1 = max(0, j - radius), min(ny, j + radius + 1)
        i0, i1 = max(0, i - radius), min(nx, i + radius + 1)
        jj, ii = np.nonzero(d.face_grid[j0:j1, i0:i1] >= 0)
        if jj.size == 0:
            continue
        jj, ii = jj + j0, ii + i0
        cx = d.origin[0] + (ii + 0.5) * h
        cy = d.origin[1] + (jj + 0.5) * h
        order = np.argsort(np.hypot(cx - p[0], cy - p[1]), kind="stable")
        for k in order:
            if not d.curveset.crosses(p, (cx[k], cy[k])):
                return int(d.face_grid[jj[k], ii[k]])
    LOGGER.debug(f"No reachable cell from {tuple(p)}; treating as on-curve")
    return ON_CURVE


def faces_of(d: ComplementDecomposition, P: np.ndarray, on_curve_tol: Optional[float] = None) -> np.ndarray:
    """Vectorized point_in_face."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    h = d.pitch
    ny, nx = d.face_grid.shape
    i = np.clip(np.floor((P[:, 0] - d.origin[0]) / h).astype(int), 0, nx - 1)
    j = np.clip(np.floor((P[:, 1] - d.origin[1]) / h).astype(int), 0, ny - 1)
    out = d.face_grid[j, i].copy()
    fast = (out >= 0) & (d.clearance[j, i] >= 2.0 * h)
    tol = d.eps_sep if on_curve_tol is None else on_curve_tol
    if tol > 0 and d.curveset.size:
        # a point in a cell of clearance >= 2h is at least ~h from every curve
        fast &= tol < h
    for k in np.flatnonzero(~fast):
        out[k] = point_in_face(d, P[k], on_curve_tol)
    return out
