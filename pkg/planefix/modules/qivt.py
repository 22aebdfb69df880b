"""
QIVT Module
Boundary-hypothesis verification for the quasi-intermediate value theorem
on a disc X with an arc A in its boundary: the sign clause, the curve
system K u [u, v]_A, the receiving face W, conditions (1)-(5), and the
fixed-point certificate inside W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from planefix import LOGGER
from planefix.modules.fixpoint import FixedPointCertificate, locate
from planefix.modules.geom import (
    ON_CURVE,
    Box,
    ComplementDecomposition,
    Polyline,
    Tolerances,
    decompose_complement,
    faces_of,
    find_crossings,
    point_in_face,
    points_in_polygon,
    subarc,
)
from planefix.modules.maps import MapExpr, image_polyline, is_moving, region_samples
from planefix.utils import (
    HypothesisViolation,
    InputError,
    PlanefixError,
    Status,
    TriState,
    Verdict,
    as_point,
)

UQ_LEVELS = 7
PARAM_NOISE = 1e-12
UQ_RINGS = (0.25, 0.5, 0.75, 1.0)
UQ_ANGLES = 32
CLAUSE_ORDER = ("sign", "containment", "disjointness", "preimage", "uq")


# ============ INSTANCE ============
@dataclass(frozen=True)
class QivtInstance:
    f: MapExpr
    X: Polyline
    A: Polyline
    x: float
    y: float
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not self.X.closed:
            raise InputError("X must be bounded by a closed polyline")
        if self.A.closed or self.A.is_point:
            raise InputError("A must be a nondegenerate open arc")
        if not (0.0 <= self.x < self.y <= 1.0):
            raise InputError(f"need 0 <= x < y <= 1 on A, got x={self.x}, y={self.y}")
        off = self.X.distance_many(self.A.array)
        if off.max() > self.tol.eps_sep:
            raise InputError(f"A leaves the boundary of X by {off.max():.3g}")

    @property
    def scale(self) -> float:
        return max(self.X.bbox.diameter, 1.0)


@dataclass(frozen=True, eq=False)
class QivtDerived:
    inst: QivtInstance
    u: Tuple[float, float]
    v: Tuple[float, float]
    lam_u: Optional[float]
    lam_v: Optional[float]
    K: Polyline
    K0: Polyline
    uv_arc: Optional[Polyline]
    decomposition: ComplementDecomposition
    sign: TriState

    @property
    def curves(self) -> Tuple[Polyline, ...]:
        return (self.K,) if self.uv_arc is None else (self.K, self.uv_arc)

    @property
    def has_order(self) -> bool:
        return self.lam_u is not None and self.lam_v is not None


def _arc_param(A: Polyline, p: np.ndarray, eps: float) -> Optional[float]:
    t, dist = A.project(p)
    return t if dist <= eps else None


def _trim_tubes(K: Polyline, radius: float) -> Polyline:
    """K with the parts inside the end tubes removed."""
    pts, ts = K.densify(radius / 4.0)
    d_start = np.hypot(*(pts - K.start).T)
    d_end = np.hypot(*(pts - K.end).T)
    out_start = np.flatnonzero(d_start >= radius)
    out_end = np.flatnonzero(d_end >= radius)
    if out_start.size == 0 or out_end.size == 0:
        return Polyline((as_point(K.point_at(0.5)),))
    a, b = ts[out_start[0]], ts[out_end[-1]]
    if a >= b:
        return Polyline((as_point(K.point_at(0.5 * (a + b))),))
    return subarc(K, a, b)


def derive(inst: QivtInstance) -> QivtDerived:
    """u, v, their arc parameters, the sign clause, K, K0 and the complement of K u [u, v]_A."""
    tol = inst.tol
    A = inst.A
    px, py = A.point_at(inst.x), A.point_at(inst.y)
    u, v = inst.f.evaluate(px), inst.f.evaluate(py)
    lam_u = _arc_param(A, u, tol.eps_sep)
    lam_v = _arc_param(A, v, tol.eps_sep)

    if lam_u is None or lam_v is None:
        sign = TriState.undecided(tol.eps_sep, note="u or v is off the arc; the order is unavailable")
    else:
        # projection noise counts as equality
        a = lam_u - inst.x if abs(lam_u - inst.x) > PARAM_NOISE else 0.0
        b = lam_v - inst.y if abs(lam_v - inst.y) > PARAM_NOISE else 0.0
        product = a * b
        if product >= 0:
            state = TriState.violated(u, v, note=f"(lam(u)-lam(x))*(lam(v)-lam(y)) = {product:.6g} >= 0")
            raise HypothesisViolation("sign", state)
        sign = TriState.satisfied(min(abs(a), abs(b)) * A.length, note=f"product {product:.6g} < 0")

    imaged = image_polyline(inst.f, subarc(A, inst.x, inst.y), tol.eps_sep / 4.0)
    K = imaged.polyline
    K0 = _trim_tubes(K, tol.tube)
    uv_arc = None
    if lam_u is not None and lam_v is not None:
        uv_arc = subarc(A, lam_u, lam_v)

    curves = [K] if uv_arc is None else [K, uv_arc]
    box = inst.X.bbox.union(K.bbox).expanded(2.0 * tol.grid_pitch)
    decomposition = decompose_complement(curves, box, tol.grid_pitch, tol.eps_sep)
    LOGGER.info(
        f"Derived u={as_point(u)} v={as_point(v)}; K has {len(K)} vertices; "
        f"{len(decomposition.bounded_faces())} bounded face(s)"
    )
    return QivtDerived(inst, as_point(u), as_point(v), lam_u, lam_v, K, K0, uv_arc, decomposition, sign)


# ============ CLAUSES ============
def check_containment(d: QivtDerived) -> TriState:
    """f([x,y]_A) inside X, allowing contact with the boundary of X."""
    X = d.inst.X
    pts, _ = d.K.densify(d.inst.tol.h_sample)
    inside = points_in_polygon(X.array, pts)
    gap = X.distance_many(pts)
    touching = gap <= 1e-9 * d.inst.scale
    outside = ~inside & ~touching
    if outside.any():
        k = int(np.argmax(np.where(outside, gap, -1.0)))
        if gap[k] > d.inst.tol.eps_sep:
            return TriState.violated(pts[k], note=f"image leaves X by {gap[k]:.3g}")
        return TriState.undecided(d.inst.tol.h_sample, note=f"image grazes the boundary of X ({gap[k]:.3g})")
    core, _ = d.K0.densify(d.inst.tol.h_sample)
    return TriState.satisfied(float(X.distance_many(core).min()), resolution=d.inst.tol.h_sample)


def check_disjointness(d: QivtDerived) -> TriState:
    """K misses the open arc (u, v)_A; K's end tubes are excluded."""
    tol = d.inst.tol
    if d.uv_arc is None:
        return TriState.undecided(tol.eps_sep, note="(u, v)_A undefined off the arc")
    if d.uv_arc.is_point:
        return TriState.satisfied(math.inf, note="u = v, (u, v)_A is empty")
    if d.K0.is_point:
        return TriState.undecided(tol.tube, note="K lies inside its end tubes")
    pts, _ = d.K0.densify(tol.h_sample)
    margin = float(d.uv_arc.distance_many(pts).min())
    if margin >= tol.eps_sep:
        return TriState.satisfied(margin, resolution=tol.h_sample)
    A1, B1 = d.K0.segments()
    A2, B2 = d.uv_arc.segments()
    hits = find_crossings(A1, B1, A2, B2)
    if len(hits):
        return TriState.violated(A1[hits[0, 0]], note="K crosses (u, v)_A")
    return TriState.undecided(tol.h_sample, note=f"K approaches (u, v)_A within {margin:.3g}")


def check_preimage_clause(d: QivtDerived, pitch: Optional[float] = None) -> TriState:
    """Points of X away from (x, y)_A must not map onto K0."""
    tol = d.inst.tol
    pitch = tol.grid_pitch if pitch is None else pitch
    f = d.inst.f
    grid = region_samples(d.inst.X, pitch)
    if f.domain.is_bounded:
        grid = grid[f.domain.contains_many(grid)]
    open_arc = subarc(d.inst.A, d.inst.x, d.inst.y)
    grid = grid[open_arc.distance_many(grid) > tol.eps_sep]
    if len(grid) == 0:
        return TriState.undecided(pitch, note="no grid points to test")
    dist = d.K0.distance_many(f.evaluate_many(grid))
    k = int(np.argmin(dist))
    margin = float(dist[k])
    if margin >= tol.eps_sep:
        return TriState.satisfied(margin, resolution=pitch)
    if margin <= 1e-9 * d.inst.scale:
        return TriState.violated(grid[k], note="a point off (x, y)_A maps onto K0")
    return TriState.undecided(pitch, note=f"image of {as_point(grid[k])} comes within {margin:.3g} of K0")


def _half_disc(X: Polyline, A: Polyline, q: np.ndarray, r: float, scale: float) -> np.ndarray:
    th = 2.0 * math.pi * (np.arange(UQ_ANGLES) + 0.5) / UQ_ANGLES
    ring = np.stack([np.cos(th), np.sin(th)], axis=1)
    pts = np.vstack([q + s * r * ring for s in UQ_RINGS])
    pts = pts[points_in_polygon(X.array, pts)]
    return pts[A.distance_many(pts) > 1e-12 * scale]


def select_W(d: QivtDerived, q_candidates: Optional[Sequence[float]] = None) -> Tuple[Optional[int], TriState]:
    """The bounded face receiving f(U_q - A) for shrinking half-discs U_q around some q in (x, y)_A."""
    inst = d.inst
    tol = inst.tol
    dec = d.decomposition
    if not dec.bounded_faces():
        return None, TriState.undecided(tol.grid_pitch, note="no bounded face")
    if q_candidates is None:
        q_candidates = [inst.x + (inst.y - inst.x) * s for s in (0.5, 0.25, 0.75, 0.125, 0.875)]
    tiny = 1e-12 * inst.scale
    notes = []
    for tq in q_candidates:
        if not inst.x < tq < inst.y:
            raise InputError(f"q parameter {tq} is not inside (x, y)")
        q = inst.A.point_at(tq)
        labels = None
        for j in range(UQ_LEVELS):
            r = tol.eps_sep * 2.0 ** (-j)
            pts = _half_disc(inst.X, inst.A, q, r, inst.scale)
            if inst.f.domain.is_bounded:
                pts = pts[inst.f.domain.contains_many(pts)]
            if len(pts) == 0:
                continue
            labels = set(faces_of(dec, inst.f.evaluate_many(pts), on_curve_tol=tiny).tolist())
            LOGGER.debug(f"U_q at q={tq:.6g}, r={r:.3g}: faces {sorted(labels)}")
        if labels is None:
            notes.append(f"q={tq:.6g}: empty neighbourhood")
            continue
        if len(labels) == 1:
            face = labels.pop()
            if face != ON_CURVE and dec.faces[face].bounded:
                LOGGER.info(f"✅ W = face {face} (via q={tq:.6g})")
                return face, TriState.satisfied(
                    tol.eps_sep * 2.0 ** (-(UQ_LEVELS - 1)), resolution=tol.eps_sep * 2.0 ** (-(UQ_LEVELS - 1)),
                    note=f"W = face {face} via q = {tq:.6g}; verdicts are certified at the reported resolution",
                )
        notes.append(f"q={tq:.6g}: faces {sorted(labels)}")
    return None, TriState.undecided(tol.eps_sep * 2.0 ** (-(UQ_LEVELS - 1)), note="; ".join(notes))


# ============ CONDITIONS ============
def _faces_of_arc(d: QivtDerived, arc: Polyline, exclude: Sequence[np.ndarray]) -> np.ndarray:
    tol = d.inst.tol
    pts, _ = arc.densify(tol.h_sample)
    img = d.inst.f.evaluate_many(pts)
    far = np.ones(len(img), dtype=bool)
    for c in exclude:
        far &= np.hypot(*(img - c).T) >= tol.tube
    return faces_of(d.decomposition, img[far], on_curve_tol=tol.eps_sep)


def check_condition(d: QivtDerived, which: int) -> TriState:
    if which not in (1, 2, 3, 4, 5):
        raise InputError(f"condition must be 1..5, got {which}")
    inst = d.inst
    tol = inst.tol
    if not d.has_order:
        return TriState.not_applicable("u or v is off the arc")
    x, y, lu, lv = inst.x, inst.y, d.lam_u, d.lam_v
    A = inst.A
    scale = A.length

    if which == 1:
        if x <= lu <= y and x <= lv <= y:
            return TriState.satisfied(min(lu - x, y - lu, lv - x, y - lv) * scale, note="{u, v} in [x, y]_A")
        return TriState.not_applicable("u or v outside [x, y]_A")

    if which == 2:
        if not (x <= lv < y < lu):
            return TriState.not_applicable("order is not x <= v < y < u")
        return is_moving(inst.f, subarc(A, y, lu), tol)

    if which == 3:
        if not (lv < x < lu <= y):
            return TriState.not_applicable("order is not v < x < u <= y")
        return is_moving(inst.f, subarc(A, lv, x), tol)

    if which == 4:
        if not (lv < x < y < lu):
            return TriState.not_applicable("order is not v < x < y < u")
        return TriState.combine([is_moving(inst.f, subarc(A, lv, x), tol), is_moving(inst.f, subarc(A, y, lu), tol)])

    if not (lu < x < y < lv):
        return TriState.not_applicable("order is not u < x < y < v")
    labels = np.concatenate([
        _faces_of_arc(d, subarc(A, lu, x), [np.array(d.u)]),
        _faces_of_arc(d, subarc(A, y, lv), [np.array(d.v)]),
    ])
    if labels.size == 0:
        return TriState.undecided(tol.tube, note="every image sample lies in an end tube")
    bounded = np.array([lab >= 0 and d.decomposition.faces[lab].bounded for lab in labels])
    unbounded = np.array([lab >= 0 and not d.decomposition.faces[lab].bounded for lab in labels])
    if bounded.all():
        return TriState.satisfied(tol.eps_sep, resolution=tol.h_sample, note="images inside D0")
    if unbounded.all():
        return TriState.satisfied(tol.eps_sep, resolution=tol.h_sample, note="images outside D0")
    return TriState.undecided(tol.h_sample, note="images straddle the boundary of D0")


# ============ PIPELINE ============
@dataclass
class QivtReport:
    clauses: Dict[str, TriState] = field(default_factory=dict)
    conditions: Dict[int, TriState] = field(default_factory=dict)
    condition: Optional[int] = None
    W: Optional[int] = None
    certificate: Optional[FixedPointCertificate] = None
    undecided_boxes: List[Box] = field(default_factory=list)
    status: Status = Status.UNDECIDED
    derived: Optional[QivtDerived] = None
    notes: List[str] = field(default_factory=list)

    def all_states(self) -> List[Tuple[str, TriState]]:
        out = [(name, self.clauses[name]) for name in CLAUSE_ORDER if name in self.clauses]
        out += [(f"condition_{k}", s) for k, s in sorted(self.conditions.items())]
        return out


def _hypothesis_status(report: QivtReport) -> Status:
    states = list(report.clauses.values())
    if any(s.verdict is Verdict.VIOLATED for s in states):
        return Status.VIOLATED
    if any(s.verdict is Verdict.UNDECIDED for s in states):
        return Status.UNDECIDED
    if report.condition is not None:
        return Status.COMPLETE
    conds = list(report.conditions.values())
    if any(s.verdict is Verdict.UNDECIDED for s in conds):
        return Status.UNDECIDED
    return Status.VIOLATED


def certify_qivt(inst: QivtInstance) -> QivtReport:
    """Check every hypothesis; when one condition holds, certify the fixed point in W."""
    report = QivtReport()
    try:
        d = derive(inst)
    except HypothesisViolation as e:
        LOGGER.info(f"❌ {e}")
        report.clauses[e.clause] = e.state
        report.status = Status.VIOLATED
        return report
    report.derived = d
    report.clauses["sign"] = d.sign
    report.clauses["containment"] = check_containment(d)
    report.clauses["disjointness"] = check_disjointness(d)
    report.clauses["preimage"] = check_preimage_clause(d)
    report.W, report.clauses["uq"] = select_W(d)

    for k in range(1, 6):
        report.conditions[k] = check_condition(d, k)
    report.condition = next((k for k, s in report.conditions.items() if s.ok), None)
    report.status = _hypothesis_status(report)
    report.notes.append("verdicts are certified at the reported resolution")
    if report.status is not Status.COMPLETE:
        LOGGER.info(f"Hypotheses not established: {report.status.value}")
        return report

    LOGGER.info(f"✅ Hypotheses hold with condition ({report.condition}); locating the fixed point in W")
    dec = d.decomposition
    region = dec.face_bbox(report.W)
    if inst.f.domain.is_bounded:
        dom = inst.f.domain
        region = Box(max(region.xmin, dom.xmin), max(region.ymin, dom.ymin),
                     min(region.xmax, dom.xmax), min(region.ymax, dom.ymax))
    try:
        found = locate(inst.f, region, inst.tol)
    except PlanefixError as e:
        LOGGER.error(f"❌ locating the fixed point failed: {e}")
        report.status = Status.UNDECIDED
        report.notes.append(f"locate failed: {e}")
        return report
    inside = [c for c in found.certificates if point_in_face(dec, c.approx, on_curve_tol=0.0) == report.W]
    report.undecided_boxes = found.undecided
    if inside:
        report.certificate = inside[0]
    elif found.undecided:
        report.status = Status.UNDECIDED
        report.notes.append("locator left undecided boxes and found no fixed point in W")
    else:
        LOGGER.error("❌ hypotheses hold but no fixed point was found in W")
        report.status = Status.INCONSISTENT
    return report
