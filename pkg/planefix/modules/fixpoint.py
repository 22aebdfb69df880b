"""
Fixpoint Module
Fixed-point location by the degree of the displacement field on box
boundaries: adaptive boundary winding, bisection with a jittered retry,
a brute-force grid oracle, 1-D intermediate value bisection and a periodic scan.
"""

from __future__ import annotations

import math
import operator
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from cachetools import LRUCache, cachedmethod
from scipy import optimize

from planefix import Config, LOGGER
from planefix.modules.geom import Box, Tolerances
from planefix.modules.maps import MapExpr
from planefix.utils import InputError, PointTuple, WindingResidualError, as_point

BOUNDARY_ZERO = "BOUNDARY_ZERO"
EDGE_START = 16
DAMPING = 0.5
DAMPED_STEPS = 40
MAX_BOXES = 20000

Degree = Union[int, str]


# ============ CERTIFICATES ============
@dataclass(frozen=True)
class FixedPointCertificate:
    box: Box
    boundary_degree: int
    approx: PointTuple
    residual: float
    boundary_margin: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "box": list(self.box.as_tuple()),
            "boundary_degree": self.boundary_degree,
            "approx": list(self.approx),
            "residual": self.residual,
            "boundary_margin": self.boundary_margin,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FixedPointCertificate":
        return cls(
            box=Box(*data["box"]),
            boundary_degree=int(data["boundary_degree"]),
            approx=as_point(data["approx"]),
            residual=float(data["residual"]),
            boundary_margin=float(data["boundary_margin"]),
        )


@dataclass
class LocateResult:
    certificates: List[FixedPointCertificate] = field(default_factory=list)
    undecided: List[Box] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.undecided


# ============ BOUNDARY DEGREE ============
@dataclass(frozen=True)
class EdgeSamples:
    points: np.ndarray
    disp: np.ndarray
    exhausted: bool

    @property
    def min_norm(self) -> float:
        return float(np.hypot(*self.disp.T).min())


class BoundarySampler:
    """Adaptive displacement samples along box edges, shared between neighbouring boxes."""

    def __init__(self, f: MapExpr, maxsize: int = 4096):
        self.f = f
        self.cache = LRUCache(maxsize=maxsize)
        self.budget = max(64, Config.MAX_SAMPLES // 4)

    def displacement(self, P: np.ndarray) -> np.ndarray:
        return self.f.evaluate_many(P) - P

    @cachedmethod(operator.attrgetter("cache"))
    def _edge(self, a: PointTuple, b: PointTuple, floor: float) -> EdgeSamples:
        pa, pb = np.array(a), np.array(b)
        ts = np.linspace(0.0, 1.0, EDGE_START + 1)
        pts = pa + ts[:, None] * (pb - pa)
        disp = self.displacement(pts)
        while True:
            norms = np.hypot(*disp.T)
            low = float(norms.min())
            if low < floor:
                return EdgeSamples(pts, disp, False)
            chords = np.hypot(*np.diff(disp, axis=0).T)
            bad = chords >= low / 3.0
            if not bad.any():
                return EdgeSamples(pts, disp, False)
            if len(ts) + int(bad.sum()) > self.budget:
                LOGGER.debug(f"Edge {a}->{b} hit the sample budget")
                return EdgeSamples(pts, disp, True)
            mids = 0.5 * (ts[:-1][bad] + ts[1:][bad])
            mid_pts = pa + mids[:, None] * (pb - pa)
            slots = np.flatnonzero(bad) + 1
            ts = np.insert(ts, slots, mids)
            pts = np.insert(pts, slots, mid_pts, axis=0)
            disp = np.insert(disp, slots, self.displacement(mid_pts), axis=0)

    def edge(self, a: PointTuple, b: PointTuple, floor: float) -> EdgeSamples:
        """Samples from a to b; stored once per unordered edge."""
        if a <= b:
            return self._edge(a, b, floor)
        s = self._edge(b, a, floor)
        return EdgeSamples(s.points[::-1], s.disp[::-1], s.exhausted)


def zero_tolerance(box: Box, tol: Tolerances) -> float:
    return min(tol.eps_sep, 1e-6 * box.diameter)


def _degree_with_margin(f: MapExpr, box: Box, tol: Tolerances,
                        sampler: Optional[BoundarySampler] = None) -> Tuple[Degree, float]:
    sampler = sampler or BoundarySampler(f)
    floor = zero_tolerance(box, tol)
    corners = [as_point(c) for c in box.corners()]
    total = 0.0
    margin = math.inf
    for k in range(4):
        s = sampler.edge(corners[k], corners[(k + 1) % 4], floor)
        low = s.min_norm
        margin = min(margin, low)
        if low < floor or s.exhausted:
            return BOUNDARY_ZERO, margin
        a, b = s.disp[:-1], s.disp[1:]
        total += float(np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0], (a * b).sum(axis=1)).sum())
    turns = total / (2.0 * math.pi)
    w = round(turns)
    if abs(turns - w) >= 1e-6:
        raise WindingResidualError(f"boundary winding residual {abs(turns - w):.3g} on {box.as_tuple()}")
    return int(w), margin


def degree_on_box(f: MapExpr, box: Box, tol: Optional[Tolerances] = None,
                  sampler: Optional[BoundarySampler] = None) -> Degree:
    """Winding of f(p) - p along the counterclockwise boundary of box, or BOUNDARY_ZERO."""
    return _degree_with_margin(f, box, tol or Tolerances(), sampler)[0]


# ============ LOCATOR ============
def _jitter_fraction(tol: Tolerances) -> float:
    if tol.jitter_seed is None:
        return 1.0 / 7.0
    return float(np.random.default_rng(tol.jitter_seed).uniform(1.0 / 9.0, 1.0 / 5.0))


def _refine(f: MapExpr, box: Box, p: np.ndarray) -> Tuple[np.ndarray, float]:
    """Damped displacement steps, kept only while the residual drops and p stays in the box."""
    g = f.evaluate(p) - p
    best = float(np.hypot(*g))
    for _ in range(DAMPED_STEPS):
        q = p + DAMPING * g
        if not box.contains(q):
            break
        gq = f.evaluate(q) - q
        r = float(np.hypot(*gq))
        if r >= best:
            break
        p, g, best = q, gq, r
    return p, best


def locate(
    f: MapExpr,
    region: Union[Box, Iterable[Box]],
    tol: Optional[Tolerances] = None,
) -> LocateResult:
    """Certify fixed points in boxes of nonzero boundary degree down to diameter tol_fix."""
    tol = tol or Tolerances()
    boxes = [region] if isinstance(region, Box) else list(region)
    sampler = BoundarySampler(f)
    fraction = _jitter_fraction(tol)
    result = LocateResult()

    queue: Deque[Tuple[Box, int, float]] = deque()
    for box in boxes:
        deg, margin = _degree_with_margin(f, box, tol, sampler)
        if deg == BOUNDARY_ZERO:
            LOGGER.warning(f"⚠️ displacement vanishes on the boundary of region box {box.as_tuple()}")
            result.undecided.append(box)
        elif deg != 0:
            queue.append((box, deg, margin))
        else:
            LOGGER.debug(f"Region box {box.as_tuple()} has degree 0")

    processed = 0
    while queue:
        box, deg, margin = queue.popleft()
        processed += 1
        if processed > MAX_BOXES:
            LOGGER.warning(f"⚠️ locate gave up after {MAX_BOXES} boxes")
            result.undecided.extend(b for b, _, _ in [(box, deg, margin), *queue])
            break
        if box.diameter < tol.tol_fix:
            p, residual = _refine(f, box, np.array(box.center))
            result.certificates.append(FixedPointCertificate(box, deg, as_point(p), residual, margin))
            continue

        children = _split(f, box, tol, sampler, fraction)
        if children is None:
            LOGGER.warning(f"⚠️ could not split {box.as_tuple()} away from boundary zeros")
            result.undecided.append(box)
            continue
        if sum(d for _, d, _ in children) != deg:
            LOGGER.warning(f"⚠️ degree additivity mismatch on {box.as_tuple()}: {deg} != {[d for _, d, _ in children]}")
        queue.extend(c for c in children if c[1] != 0)

    result.certificates.sort(key=lambda c: (c.box.xmin, c.box.ymin))
    result.undecided.sort(key=lambda b: (b.xmin, b.ymin))
    for cert in result.certificates:
        LOGGER.info(f"✅ Fixed point near ({cert.approx[0]:.12g}, {cert.approx[1]:.12g}), residual {cert.residual:.3g}")
    return result


def _split(f: MapExpr, box: Box, tol: Tolerances, sampler: BoundarySampler,
           fraction: float) -> Optional[List[Tuple[Box, int, float]]]:
    first, second = box.split()
    along_x = box.width >= box.height
    for attempt in range(2):
        if attempt:
            width = box.width if along_x else box.height
            shift = min(tol.eps_sep, width) * fraction
            cut = (0.5 * (box.xmin + box.xmax) if along_x else 0.5 * (box.ymin + box.ymax)) + shift
            LOGGER.debug(f"🔄 jittering split of {box.as_tuple()} by {shift:.3g}")
            first, second = box.split(at=cut)
        out = []
        for child in (first, second):
            d, m = _degree_with_margin(f, child, tol, sampler)
            if d == BOUNDARY_ZERO:
                break
            out.append((child, d, m))
        else:
            return out
    return None


# ============ ORACLES ============
def grid_oracle(f: MapExpr, box: Box, pitch: float) -> Tuple[float, PointTuple]:
    """Minimum of |f(p) - p| over a grid of pitch `pitch` in box, with its argmin."""
    if pitch <= 0:
        raise InputError("oracle pitch must be positive")
    xs = np.linspace(box.xmin, box.xmax, max(2, int(math.ceil(box.width / pitch)) + 1))
    ys = np.linspace(box.ymin, box.ymax, max(2, int(math.ceil(box.height / pitch)) + 1))
    best, arg = math.inf, (xs[0], ys[0])
    rows = max(1, (1 << 20) // len(xs))
    for s in range(0, len(ys), rows):
        gx, gy = np.meshgrid(xs, ys[s:s + rows])
        P = np.stack([gx.ravel(), gy.ravel()], axis=1)
        d = np.hypot(*(f.evaluate_many(P) - P).T)
        k = int(np.argmin(d))
        if d[k] < best:
            best, arg = float(d[k]), as_point(P[k])
    return best, arg


def ivt_1d(f: MapExpr, x: float, y: float, tol: Optional[Tolerances] = None) -> Optional[float]:
    """Fixed point of a map of the x-axis on [x, y] when the displacement changes sign."""
    tol = tol or Tolerances()
    lo, hi = sorted((float(x), float(y)))
    rs = np.linspace(lo, hi, 65)
    img = f.evaluate_many(np.stack([rs, np.zeros_like(rs)], axis=1))
    if np.abs(img[:, 1]).max() > tol.eps_sep:
        raise InputError("ivt_1d needs a map that keeps the segment on the x-axis")

    def h(r: float) -> float:
        return float(f.evaluate((r, 0.0))[0] - r)

    ha, hb = h(lo), h(hi)
    if ha == 0.0:
        return lo
    if hb == 0.0:
        return hi
    if ha * hb > 0:
        return None
    # the residual must meet tol_fix, not only the bracket width
    xtol = float(np.spacing(max(abs(lo), abs(hi), 1.0)))
    r = float(optimize.bisect(h, lo, hi, xtol=xtol, maxiter=400))
    residual = abs(h(r))
    if residual > tol.tol_fix:
        LOGGER.warning(f"⚠️ ivt_1d stopped at float resolution with residual {residual:.3g} > tol_fix {tol.tol_fix:.3g}")
        return None
    return r


def periodic_scan(
    f: MapExpr,
    box: Box,
    pitch: float,
    periods: Sequence[int] = range(2, 9),
    threshold: float = 1e-6,
) -> List[Tuple[PointTuple, int]]:
    """Grid points that return within threshold after k steps without being fixed."""
    xs = np.linspace(box.xmin, box.xmax, max(2, int(round(box.width / pitch)) + 1))
    ys = np.linspace(box.ymin, box.ymax, max(2, int(round(box.height / pitch)) + 1))
    gx, gy = np.meshgrid(xs, ys)
    start = np.stack([gx.ravel(), gy.ravel()], axis=1)
    alive = np.ones(len(start), dtype=bool)
    cur = start.copy()
    fixed = np.zeros(len(start), dtype=bool)
    hits: List[Tuple[PointTuple, int]] = []
    top = max(periods)
    wanted = set(periods)
    for k in range(1, top + 1):
        if f.domain.is_bounded:
            alive &= f.domain.contains_many(cur)
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        cur[idx] = f.evaluate_many(cur[idx])
        back = np.hypot(*(cur - start).T) <= threshold
        if k == 1:
            fixed = back & alive
            continue
        if k in wanted:
            for i in np.flatnonzero(back & alive & ~fixed):
                hits.append((as_point(start[i]), k))
    LOGGER.debug(f"periodic_scan: {len(hits)} hits over {len(start)} grid points")
    return hits
