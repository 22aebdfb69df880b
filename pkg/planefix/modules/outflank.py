"""
Outflank Module
Step arcs threaded through an orbit, the search for an outflanking point,
the construction of an outflanking arc from a periodic orbit and the
certification of the fixed point the outflanking arc forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from planefix import LOGGER
from planefix.modules.angles import Orientation, circle_polyline
from planefix.modules.fixpoint import FixedPointCertificate, locate
from planefix.modules.geom import (
    Box,
    Polyline,
    Tolerances,
    concat_polylines,
    decompose_complement,
    find_crossings,
    is_simple,
    point_in_face,
    points_in_polygon,
    subarc,
    xy,
)
from planefix.modules.maps import (
    Affine,
    MapExpr,
    conjugate,
    disc_samples,
    dodges,
    exclusive_in,
    image_polyline,
    injectivity_margin,
    is_moving,
    is_periodic,
    local_orientation,
    orbit,
)
from planefix.utils import (
    DomainError,
    InputError,
    PlanefixError,
    PointTuple,
    Status,
    TriState,
    Verdict,
    as_point,
)

MAX_CANDIDATES = 32
CONTACT_RTOL = 1e-9
TIE_RTOL = 1e-6
BOUNDARY_SAMPLES = 256
CLAUSE_ORDER = ("containment", "orientation", "injectivity", "exclusivity")

Region = Union[Box, Polyline]


# ============ STEP ARCS ============
@dataclass(frozen=True)
class StepArc:
    """An arc A with marked parameters t_0 = 0 < ... < t_n = 1 at u_k = f^k(u_0)."""
    A: Polyline
    params: Tuple[float, ...]
    f: MapExpr

    def __post_init__(self):
        if self.A.closed:
            raise InputError("a step arc needs an open polyline")
        object.__setattr__(self, "params", tuple(float(t) for t in self.params))
        if len(self.params) < 2:
            raise InputError("a step arc needs at least two orbit parameters")

    @property
    def n(self) -> int:
        return len(self.params) - 1

    def u(self, k: int) -> np.ndarray:
        return self.A.point_at(self.params[k])

    def step(self, k: int) -> Polyline:
        """[u_k, u_k+1]_A."""
        return subarc(self.A, self.params[k], self.params[k + 1])

    @property
    def last_start(self) -> float:
        return self.params[-2]


def _one_sided(src: Polyline, dst: Polyline, step: float) -> Tuple[float, np.ndarray]:
    pts, _ = src.densify(step)
    d = dst.distance_many(pts)
    k = int(np.argmax(d))
    return float(d[k]), pts[k]


def validate_step_arc(A: Polyline, f: MapExpr, params: Sequence[float], tol: Tolerances) -> TriState:
    """Order, orbit consistency and the step equations up to Hausdorff distance eps_sep."""
    ts = np.asarray(params, dtype=float)
    if len(ts) < 2:
        return TriState.violated(A.start, note="fewer than two orbit parameters")
    if np.any(np.diff(ts) <= 0):
        k = int(np.flatnonzero(np.diff(ts) <= 0)[0]) + 1
        return TriState.violated(A.point_at(float(np.clip(ts[k], 0, 1))), note=f"orbit parameter {k} is out of order")
    if abs(ts[0]) > 0 or abs(ts[-1] - 1.0) > 0:
        return TriState.violated(A.start, A.end, note="u_0 and u_n must be the endpoints of A")

    n = len(ts) - 1
    o = orbit(f, A.start, n)
    if o.truncated:
        return TriState.violated(o.points[-1], note=f"orbit leaves the domain after {len(o) - 1} steps")
    for k in range(n + 1):
        uk = A.point_at(ts[k])
        gap = math.dist(as_point(uk), o.points[k])
        if gap > tol.eps_sep:
            return TriState.violated(uk, o.points[k], note=f"u_{k} is not f^{k}(u_0) (off by {gap:.3g})")
    if n == 1:
        return TriState.satisfied(tol.eps_sep, note="one-step arc")

    sa = StepArc(A, tuple(ts), f)
    worst = 0.0
    for k in range(n - 1):
        img = image_polyline(f, sa.step(k), tol.eps_sep / 4.0).polyline
        nxt = sa.step(k + 1)
        d1, p1 = _one_sided(img, nxt, tol.h_sample)
        d2, p2 = _one_sided(nxt, img, tol.h_sample)
        d, p = (d1, p1) if d1 >= d2 else (d2, p2)
        LOGGER.debug(f"step {k}: Hausdorff deviation {d:.3g}")
        worst = max(worst, d)
        if d > tol.eps_sep:
            return TriState.violated(p, note=f"f([u_{k}, u_{k + 1}]) deviates from [u_{k + 1}, u_{k + 2}] by {d:.3g}")
    return TriState.satisfied(tol.eps_sep - worst, resolution=tol.h_sample, note=f"{n}-step arc")


# ============ OUTFLANKING POINT ============
@dataclass(frozen=True)
class OutflankCertificate:
    base: StepArc
    y: float
    v: PointTuple
    v_param: float
    contact: float
    injectivity: TriState
    dodge: TriState
    moving: TriState

    @property
    def y_point(self) -> np.ndarray:
        return self.base.A.point_at(self.y)

    @property
    def n(self) -> int:
        return self.base.n

    def states(self) -> List[Tuple[str, TriState]]:
        return [("injectivity", self.injectivity), ("dodge", self.dodge), ("moving", self.moving)]

    def revalidate(self, tol: Tolerances, density: int = 4) -> List[Tuple[str, TriState]]:
        """Re-run the outflanking clauses at y on a sampling `density` times finer."""
        finer = tol.with_(h_sample=tol.h_sample / density)
        injectivity, dodge, moving = _verify(self.base, self.y, finer)
        return [("injectivity", injectivity), ("dodge", dodge), ("moving", moving)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "orbit_params": list(self.base.params),
            "y": self.y,
            "y_point": list(as_point(self.y_point)),
            "v": list(self.v),
            "v_param": self.v_param,
            "contact": self.contact,
        }


@dataclass
class OutflankSearch:
    certificate: Optional[OutflankCertificate] = None
    diagnostics: List[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.certificate is not None


def _prefix_distance(A: Polyline, t: float, p: np.ndarray) -> Tuple[float, float]:
    """Distance from p to [A(0), A(t)] and the parameter of the nearest point."""
    if t <= 0:
        return float(np.hypot(*(p - A.start))), 0.0
    s, d = subarc(A, 0.0, t).project(p)
    return d, s * t


def _scan_distances(sa: StepArc, ts: np.ndarray) -> np.ndarray:
    A = sa.A
    img = sa.f.evaluate_many(A.points_at(ts))
    nearest, dist = A.project_many(img)
    out = dist.copy()
    # the global nearest point may lie beyond t; then only the prefix counts
    for i in np.flatnonzero(nearest >= ts):
        out[i] = _prefix_distance(A, float(ts[i]), img[i])[0]
    return out


def _verify(sa: StepArc, y: float, tol: Tolerances) -> Tuple[TriState, TriState, TriState]:
    f, A = sa.f, sa.A
    head = subarc(A, sa.last_start, y)
    pts, _ = head.densify(tol.h_sample)
    inj = injectivity_margin(f, pts, eps=2.0 * tol.h_sample)
    if inj.injective:
        injectivity = TriState.satisfied(inj.margin if math.isfinite(inj.margin) else tol.eps_sep,
                                         resolution=tol.h_sample)
    else:
        injectivity = TriState.violated(*inj.witness, note="two points of [u_n-1, y] share an image")
    dodge = dodges(f, head, A, tol, open_ends=True)
    moving = is_moving(f, subarc(A, y, 1.0), tol)
    return injectivity, dodge, moving


def _polish(sa: StepArc, lo: float, hi: float, seed: float) -> float:
    """Pin the local minimum of the prefix distance inside [lo, hi]."""
    A = sa.A

    def dist(t: float) -> float:
        return _prefix_distance(A, t, sa.f.evaluate(A.point_at(t)))[0]

    candidates = [seed, lo, hi]
    if hi > lo:
        res = optimize.minimize_scalar(dist, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        candidates.append(float(res.x))
    cum = A.params
    candidates.extend(float(t) for t in cum[(cum > lo) & (cum < hi)])
    return min(candidates, key=lambda t: (dist(t), t))


def find_outflanking_point(sa: StepArc, tol: Optional[Tolerances] = None) -> OutflankSearch:
    """Smallest y in (u_n-1, u_n] with f(y) on [u_0, y)_A whose outflanking clauses hold."""
    tol = tol or Tolerances()
    tol.check_lipschitz(sa.f.lipschitz(sa.A.bbox), "the step-arc map")
    A = sa.A
    search = OutflankSearch()
    t0 = sa.last_start
    dt = tol.h_sample / max(A.length, tol.h_sample)
    ts = np.append(np.arange(t0 + dt, 1.0, dt), 1.0)
    try:
        D = _scan_distances(sa, ts)
    except DomainError as e:
        search.diagnostics.append(f"scan left the domain: {e}")
        return search

    near = np.concatenate([[False], D <= tol.eps_sep, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(near))
    runs = list(zip(edges[::2], edges[1::2]))
    if not runs:
        search.diagnostics.append(f"f((u_n-1, u_n]) stays {float(D.min()):.3g} away from the arc behind it")
        return search

    for attempt, (start, stop) in enumerate(runs):
        if attempt >= MAX_CANDIDATES:
            search.diagnostics.append(f"gave up after {MAX_CANDIDATES} candidates")
            break
        k = start + int(np.argmin(D[start:stop]))
        lo = float(ts[k - 1]) if k > 0 else t0
        hi = float(ts[min(k + 1, len(ts) - 1)])
        y = _polish(sa, lo, hi, float(ts[k]))
        fy = sa.f.evaluate(A.point_at(y))
        contact, v_param = _prefix_distance(A, y, fy)
        if contact > tol.eps_sep:
            search.diagnostics.append(f"y={y:.9g}: no return within eps_sep ({contact:.3g})")
            continue
        injectivity, dodge, moving = _verify(sa, y, tol)
        if injectivity.ok and dodge.ok and moving.ok:
            v = as_point(A.point_at(v_param))
            LOGGER.info(f"✅ Outflanking point y={y:.12g}, outflanked point v=({v[0]:.9g}, {v[1]:.9g})")
            search.certificate = OutflankCertificate(sa, y, v, v_param, contact, injectivity, dodge, moving)
            return search
        search.diagnostics.append(
            f"y={y:.9g}: injectivity {injectivity.verdict.value}, dodge {dodge.verdict.value}, "
            f"moving {moving.verdict.value}"
        )
    LOGGER.info(f"No outflanking point: {len(search.diagnostics)} candidates rejected")
    return search


def reduce_outflanked_origin(cert: OutflankCertificate) -> OutflankCertificate:
    """Drop [u_0, u_k)_A when v already lies in [u_k, u_k+1)_A."""
    params = cert.base.params
    k = max(i for i in range(cert.n) if params[i] <= cert.v_param)
    if k == 0:
        return cert
    tk = params[k]
    span = 1.0 - tk

    def rescale(t: float) -> float:
        return min(1.0, max(0.0, (t - tk) / span))

    A = subarc(cert.base.A, tk, 1.0)
    base = StepArc(A, tuple(rescale(t) for t in params[k:]), cert.base.f)
    LOGGER.debug(f"Outflanked point lies past u_{k}; keeping {base.n} of {cert.n} steps")
    return OutflankCertificate(base, rescale(cert.y), cert.v, rescale(cert.v_param), cert.contact,
                               cert.injectivity, cert.dodge, cert.moving)


def detect_outflanking(sa: StepArc, tol: Optional[Tolerances] = None) -> Optional[OutflankCertificate]:
    """For injective f|A: when f((u_n-1, u_n]) meets A the arc outflanks at the first return."""
    tol = tol or Tolerances()
    tail = subarc(sa.A, sa.last_start, 1.0)
    state = dodges(sa.f, tail, sa.A, tol, exclude=[sa.A.end])
    if state.ok:
        LOGGER.debug("f((u_n-1, u_n]) misses A; no outflanking")
        return None
    return find_outflanking_point(sa, tol).certificate


# ============ CONSTRUCTION FROM A PERIODIC ORBIT ============
@dataclass
class Construction:
    step_arc: Optional[StepArc] = None
    certificate: Optional[OutflankCertificate] = None
    case: Optional[str] = None
    contact: Optional[float] = None
    w: Optional[PointTuple] = None
    w_prime: Optional[PointTuple] = None
    failure: Optional[str] = None
    diagnostics: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.certificate is not None

    def fail(self, step: str, message: str) -> "Construction":
        self.failure = f"{step}: {message}"
        LOGGER.warning(f"⚠️ construction failed at {self.failure}")
        return self


def normalizing_similarity(u0: Any, u1: Any) -> Affine:
    """The similarity z -> (z - u0) / (u1 - u0)."""
    u0, u1 = xy(u0), xy(u1)
    w = u1 - u0
    n2 = float(w @ w)
    if n2 == 0:
        raise InputError("u0 and u1 coincide")
    a, b = w[0] / n2, -w[1] / n2
    M = np.array([[a, -b], [b, a]])
    return Affine(tuple(map(tuple, M)), tuple(-(M @ u0)))


def _square(t: float) -> Polyline:
    """Boundary of [-t, t]^2, anticlockwise from the corner (t, t)."""
    return Polyline(((t, t), (-t, t), (-t, -t), (t, -t)), closed=True)


def _squares_meet(g: MapExpr, t: float, chord: float) -> bool:
    sq = _square(t)
    img = image_polyline(g, sq, chord).polyline
    A1, B1 = sq.segments()
    A2, B2 = img.segments()
    if len(find_crossings(A1, B1, A2, B2)):
        return True
    return bool(points_in_polygon(img.array, sq.array[:1])[0] or points_in_polygon(sq.array, img.array[:1])[0])


def first_contact(g: MapExpr, tol: Tolerances, t_max: float = 1.0) -> float:
    """Largest t with Q_t and g(Q_t) disjoint, to relative width 1e-9."""
    chord = tol.eps_sep / 4.0
    if not _squares_meet(g, t_max, chord):
        raise InputError(f"Q_t and its image are still disjoint at t={t_max}")
    lo, hi = 0.0, t_max
    while hi - lo > CONTACT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if _squares_meet(g, mid, chord):
            hi = mid
        else:
            lo = mid
    return lo


def contact_points(g: MapExpr, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """w' on the boundary of Q_b with g(w') touching it; ties go to the first w anticlockwise from (b, b)."""
    sq = _square(b)
    src, params = sq.densify(sq.length / (4 * BOUNDARY_SAMPLES))
    src, params = src[:-1], params[:-1]
    img = g.evaluate_many(src)
    where, dist = sq.project_many(img)
    dmin = float(dist.min())
    tie = dmin + TIE_RTOL * b
    ties = np.flatnonzero(dist <= tie)
    j = int(ties[np.argmin(where[ties])])

    def gap(s: float) -> float:
        return float(sq.project(g.evaluate(sq.point_at(s)))[1])

    lo = params[j - 1] if j > 0 else 0.0
    hi = params[j + 1] if j + 1 < len(params) else 1.0
    res = optimize.minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    s = float(res.x) if gap(float(res.x)) < dist[j] - TIE_RTOL * b else float(params[j])
    w_prime = sq.point_at(s)
    return g.evaluate(w_prime), w_prime


def _junction_params(parts: Sequence[Polyline], A: Polyline) -> Tuple[float, ...]:
    idx = np.cumsum([0] + [len(p.loop) - 1 for p in parts])
    return tuple(float(A.params[i]) for i in idx)


def construct_from_periodic_orbit(f: MapExpr, x: Any, m: int, tol: Optional[Tolerances] = None) -> Construction:
    """Build an outflanking arc from the m-periodic point x by the growing-square argument."""
    tol = tol or Tolerances()
    out = Construction()
    x = xy(x)
    if m < 2:
        return out.fail("precondition", "the orbit period must be at least 2")
    try:
        fx = f.evaluate(x)
        periodic = is_periodic(f, x, m, tol.eps_sep)
    except DomainError as e:
        return out.fail("precondition", f"orbit leaves the domain: {e}")
    if not periodic:
        return out.fail("precondition", f"x does not return after {m} steps")
    if float(np.hypot(*(fx - x))) <= tol.eps_sep:
        return out.fail("precondition", "x is a fixed point")

    h = normalizing_similarity(x, fx)
    h_inv = h.inverse()
    g = conjugate(f, h)
    try:
        b = first_contact(g, tol)
        w, w_prime = contact_points(g, b)
        chord = tol.eps_sep / 4.0
        seg = Polyline(((0.0, 0.0), as_point(w)))
        L = image_polyline(g, Polyline(((0.0, 0.0), as_point(w_prime))), chord).polyline.reversed()
        J = concat_polylines([seg, L])
    except (DomainError, InputError) as e:
        return out.fail("contact", str(e))
    out.contact = b
    out.w, out.w_prime = as_point(h_inv.evaluate(w)), as_point(h_inv.evaluate(w_prime))
    LOGGER.info(f"First contact of Q_t with its image at t={b:.9g}")

    simple, pair = is_simple(J)
    if not simple:
        return out.fail("arc J", f"J is not simple at segments {pair}")

    parts = [J]
    found: Optional[OutflankCertificate] = None
    for n in range(1, m):
        if n > 1:
            try:
                parts.append(image_polyline(g, parts[-1], chord).polyline)
            except (DomainError, InputError) as e:
                return out.fail("iterated images", str(e))
        A = concat_polylines(parts)
        simple, pair = is_simple(A)
        if not simple:
            i, j = pair
            a, _ = A.segments()
            return out.fail("assembled arc", f"{n}-step arc crosses itself between {as_point(a[i])} and {as_point(a[j])}")
        search = find_outflanking_point(StepArc(A, _junction_params(parts, A), g), tol)
        out.diagnostics.extend(f"n={n}: {d}" for d in search.diagnostics)
        if search.found:
            found = search.certificate
            break
    if found is None:
        return out.fail("first return", f"no step n < {m} returns behind u_0")

    out.case = "ONE_STEP" if found.n == 1 else "ITERATED"
    A_back = found.base.A.transformed(h_inv.evaluate_many)
    sa = StepArc(A_back, found.base.params, f)
    injective = injectivity_margin(f, A_back.densify(tol.h_sample)[0], eps=2.0 * tol.h_sample)
    if not injective.injective:
        return out.fail("injectivity", f"f is not injective on the arc near {injective.witness}")
    search = find_outflanking_point(sa, tol)
    out.diagnostics.extend(f"mapped back: {d}" for d in search.diagnostics)
    if not search.found:
        return out.fail("mapped back", "the outflanking point did not survive the inverse similarity")
    out.step_arc, out.certificate = sa, search.certificate
    LOGGER.info(f"✅ Built a {sa.n}-step outflanking arc ({out.case}) from a period-{m} orbit")
    return out


# ============ CERTIFICATION ============
@dataclass
class OutflankReport:
    E: Optional[Region] = None
    clauses: Dict[str, TriState] = field(default_factory=dict)
    disc_center: Optional[PointTuple] = None
    disc_radius: Optional[float] = None
    orientation: Orientation = Orientation.UNDECIDED
    K: Optional[Polyline] = None
    P: Optional[Polyline] = None
    W: Optional[int] = None
    face_runs: List[Tuple[float, float, float, float]] = field(default_factory=list)
    certificate: Optional[FixedPointCertificate] = None
    undecided_boxes: List[Box] = field(default_factory=list)
    status: Status = Status.UNDECIDED
    notes: List[str] = field(default_factory=list)

    def all_states(self) -> List[Tuple[str, TriState]]:
        return [(name, self.clauses[name]) for name in CLAUSE_ORDER if name in self.clauses]


def default_region(sa: StepArc, tol: Tolerances) -> Polyline:
    """A disc comfortably containing A and f(A)."""
    img = image_polyline(sa.f, sa.A, tol.eps_sep / 4.0).polyline
    box = sa.A.bbox.union(img.bbox)
    radius = 0.75 * box.diameter + 4.0 * tol.eps_sep
    return circle_polyline(box.center, radius, 128)


def check_containment(sa: StepArc, E: Region, tol: Tolerances) -> TriState:
    img = image_polyline(sa.f, sa.A, tol.eps_sep / 4.0).polyline
    pts = np.vstack([sa.A.densify(tol.h_sample)[0], img.densify(tol.h_sample)[0]])
    boundary = E.boundary() if isinstance(E, Box) else E
    inside = points_in_polygon(boundary.array, pts)
    dist = boundary.distance_many(pts)
    if not inside.all():
        return TriState.violated(pts[int(np.flatnonzero(~inside)[0])], note="A u f(A) leaves E")
    k = int(np.argmin(dist))
    if dist[k] >= tol.eps_sep:
        return TriState.satisfied(float(dist[k]), resolution=tol.h_sample)
    return TriState.undecided(tol.h_sample, note=f"A u f(A) comes within {dist[k]:.3g} of the boundary of E")


def check_last_disc(sa: StepArc, tol: Tolerances) -> Tuple[Orientation, TriState]:
    """Orientation and injectivity of f on the disc of radius injectivity_radius about u_n-1."""
    center = sa.u(sa.n - 1)
    radius = tol.injectivity_radius
    orientation = local_orientation(sa.f, center, radius)
    inj = injectivity_margin(sa.f, disc_samples(center, radius, radius / 16.0), eps=radius / 16.0)
    if inj.injective:
        state = TriState.satisfied(inj.margin if math.isfinite(inj.margin) else radius, resolution=radius / 16.0)
    else:
        state = TriState.violated(*inj.witness, note="two points of the disc share an image")
    return orientation, state


def outflank_curves(cert: OutflankCertificate, tol: Tolerances) -> Tuple[Polyline, Polyline]:
    """K = f([u_n-1, y]_A) and [v, u]_A; together they bound the face holding the fixed point."""
    sa = cert.base
    K = image_polyline(sa.f, subarc(sa.A, sa.last_start, cert.y), tol.eps_sep / 4.0).polyline
    return K, subarc(sa.A, cert.v_param, 1.0)


def certify_outflank(cert: OutflankCertificate, E: Optional[Region] = None,
                     tol: Optional[Tolerances] = None) -> OutflankReport:
    """Check the disc hypotheses for an outflanking arc and certify the fixed point they force."""
    tol = tol or Tolerances()
    sa = cert.base
    E = default_region(sa, tol) if E is None else E
    report = OutflankReport(E=E)
    report.clauses["containment"] = check_containment(sa, E, tol)
    report.orientation, report.clauses["injectivity"] = check_last_disc(sa, tol)
    report.disc_center, report.disc_radius = as_point(sa.u(sa.n - 1)), tol.injectivity_radius
    if report.orientation is Orientation.PRESERVING:
        report.clauses["orientation"] = TriState.satisfied(tol.injectivity_radius, note="orientation preserving")
    elif report.orientation is Orientation.REVERSING:
        report.clauses["orientation"] = TriState.violated(sa.u(sa.n - 1), note="orientation reversing")
    else:
        report.clauses["orientation"] = TriState.undecided(tol.injectivity_radius, note="orientation undecided")
    head = subarc(sa.A, sa.last_start, cert.y)
    report.clauses["exclusivity"] = exclusive_in(sa.f, head, E, tol)
    report.notes.append(f"U_n-1 is the disc of radius {tol.injectivity_radius:g} about u_n-1")
    report.notes.append("verdicts are certified at the reported resolution")

    states = [s for _, s in report.all_states()]
    if any(s.verdict is Verdict.VIOLATED for s in states):
        report.status = Status.VIOLATED
    elif not all(s.ok for s in states):
        report.status = Status.UNDECIDED
    else:
        report.status = Status.COMPLETE
    if report.status is not Status.COMPLETE:
        LOGGER.info(f"Outflanking hypotheses not established: {report.status.value}")
        return report

    try:
        K, tail = outflank_curves(cert, tol)
        report.K = K
        report.P = concat_polylines([tail, K], closed=True)
        box = K.bbox.union(tail.bbox).expanded(4.0 * tol.grid_pitch)
        dec = decompose_complement([K, tail], box, tol.grid_pitch, tol.eps_sep)
    except PlanefixError as e:
        LOGGER.error(f"❌ could not decompose the complement of K u [v, u]_A: {e}")
        report.status = Status.UNDECIDED
        report.notes.append(f"decomposition failed: {e}")
        return report
    bounded = [face for face in dec.bounded_faces() if not face.low_confidence] or dec.bounded_faces()
    if not bounded:
        report.status = Status.UNDECIDED
        report.notes.append("K u [v, u]_A bounds no face at the grid resolution")
        return report
    W = max(bounded, key=lambda face: face.cells)
    report.W = W.index
    report.face_runs = dec.face_runs(W.index)

    region = dec.face_bbox(W.index)
    if sa.f.domain.is_bounded:
        dom = sa.f.domain
        region = Box(max(region.xmin, dom.xmin), max(region.ymin, dom.ymin),
                     min(region.xmax, dom.xmax), min(region.ymax, dom.ymax))
    try:
        found = locate(sa.f, region, tol)
    except PlanefixError as e:
        LOGGER.error(f"❌ locating the fixed point failed: {e}")
        report.status = Status.UNDECIDED
        report.notes.append(f"locate failed: {e}")
        return report
    inside = [c for c in found.certificates if point_in_face(dec, c.approx, on_curve_tol=0.0) == W.index]
    report.undecided_boxes = found.undecided
    if inside:
        report.certificate = inside[0]
    elif found.undecided:
        report.status = Status.UNDECIDED
        report.notes.append("locator left undecided boxes and found no fixed point in W")
    else:
        LOGGER.error("❌ outflanking hypotheses hold but no fixed point was found")
        report.status = Status.INCONSISTENT
    return report
