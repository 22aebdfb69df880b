"""
Maps Module
Plane-map expression trees with Lipschitz bounds, adaptive curve imaging,
orbits, the sampled relational predicates (moving, dodges, exclusive) and
injectivity and orientation checks on small discs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from planefix import Config, LOGGER
from planefix.modules.angles import DirectedCircle, Orientation, circle_polyline, orientation_of_embedding
from planefix.modules.geom import (
    Box,
    Polyline,
    Tolerances,
    find_crossings,
    is_simple,
    nearest_on_segments,
    points_in_polygon,
    xy,
)
from planefix.utils import (
    DomainError,
    InputError,
    PlanefixError,
    RefinementError,
    TriState,
    as_point,
)

FIXED_DEPTH = 64
DOMAIN_PAD = 1e-9
WITNESS_STEPS = 60

Region = Union[Box, Polyline]


# ============ MAP EXPRESSIONS ============
@dataclass(frozen=True)
class MapExpr:
    """Base node. Subclasses implement _apply on an (N, 2) array."""
    domain: Box = field(default_factory=Box.everywhere, kw_only=True)

    kind = "MAP"

    def _apply(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_many(self, P: Any) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        if self.domain.is_bounded:
            inside = self.domain.contains_many(P, pad=DOMAIN_PAD)
            if not inside.all():
                bad = P[np.flatnonzero(~inside)[0]]
                raise DomainError(f"{self.kind}: point {as_point(bad)} outside domain {self.domain.as_tuple()}")
        return self._apply(P)

    def evaluate(self, p: Any) -> np.ndarray:
        return self.evaluate_many(xy(p)[None])[0]

    __call__ = evaluate

    def lipschitz(self, box: Optional[Box] = None) -> Optional[float]:
        return None

    def inverse(self) -> "MapExpr":
        raise InputError(f"{self.kind} has no inverse")

    def image_box(self, box: Box) -> Box:
        """A box containing the image of `box`."""
        if self.domain.is_bounded and not box.is_bounded:
            box = self.domain
        if not box.is_bounded:
            return Box.everywhere()
        n = 9
        gx, gy = np.meshgrid(np.linspace(box.xmin, box.xmax, n), np.linspace(box.ymin, box.ymax, n))
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        img = self.evaluate_many(pts)
        L = self.lipschitz(box)
        if L is None:
            return Box.everywhere()
        pad = L * math.hypot(box.width, box.height) / (n - 1)
        return Box.around(img, pad)

    def params(self) -> Dict[str, Any]:
        return {}


@dataclass(frozen=True)
class Affine(MapExpr):
    matrix: Tuple[Tuple[float, float], Tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))
    offset: Tuple[float, float] = (0.0, 0.0)

    kind = "AFFINE"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        b = np.asarray(self.offset, dtype=float)
        if m.shape != (2, 2) or b.shape != (2,) or not (np.isfinite(m).all() and np.isfinite(b).all()):
            raise InputError("affine map needs a finite 2x2 matrix and offset")
        object.__setattr__(self, "matrix", tuple(map(tuple, m.tolist())))
        object.__setattr__(self, "offset", tuple(b.tolist()))

    @property
    def M(self) -> np.ndarray:
        return np.array(self.matrix)

    @property
    def b(self) -> np.ndarray:
        return np.array(self.offset)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.M))

    def as_affine(self) -> "Affine":
        return self

    def _apply(self, P: np.ndarray) -> np.ndarray:
        return P @ self.M.T + self.b

    def lipschitz(self, box: Optional[Box] = None) -> float:
        return float(np.linalg.norm(self.M, 2))

    def image_box(self, box: Box) -> Box:
        if not box.is_bounded:
            return Box.everywhere()
        return Box.around(self._apply(box.corners()))

    def inverse(self) -> "Affine":
        if abs(self.determinant) < 1e-14:
            raise InputError("singular affine map has no inverse")
        inv = np.linalg.inv(self.M)
        domain = self.image_box(self.domain) if self.domain.is_bounded else Box.everywhere()
        return Affine(tuple(map(tuple, inv)), tuple(-inv @ self.b), domain=domain)

    def fixed_point(self) -> Optional[np.ndarray]:
        a = self.M - np.eye(2)
        if abs(np.linalg.det(a)) < 1e-14:
            return None
        return np.linalg.solve(a, -self.b)

    def params(self) -> Dict[str, Any]:
        (a, b), (c, d) = self.matrix
        return {"matrix": [a, b, c, d], "offset": list(self.offset)}


@dataclass(frozen=True)
class ComplexScaleRot(MapExpr):
    """z -> scale * exp(i angle) * z."""
    scale: float = 1.0
    angle: float = 0.0

    kind = "COMPLEX_SCALE_ROT"

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0 and math.isfinite(self.angle)):
            raise InputError("complex scale must be positive and the angle finite")

    def as_affine(self) -> Affine:
        c, s = self.scale * math.cos(self.angle), self.scale * math.sin(self.angle)
        return Affine(((c, -s), (s, c)), (0.0, 0.0), domain=self.domain)

    def _apply(self, P: np.ndarray) -> np.ndarray:
        return self.as_affine()._apply(P)

    def lipschitz(self, box: Optional[Box] = None) -> float:
        return float(self.scale)

    def image_box(self, box: Box) -> Box:
        return self.as_affine().image_box(box)

    def inverse(self) -> "ComplexScaleRot":
        domain = self.image_box(self.domain) if self.domain.is_bounded else Box.everywhere()
        return ComplexScaleRot(1.0 / self.scale, -self.angle, domain=domain)

    def params(self) -> Dict[str, Any]:
        return {"scale": self.scale, "angle": self.angle}


@dataclass(frozen=True)
class Translate(MapExpr):
    vector: Tuple[float, float] = (0.0, 0.0)

    kind = "TRANSLATE"

    def __post_init__(self):
        object.__setattr__(self, "vector", as_point(self.vector))

    def as_affine(self) -> Affine:
        return Affine(((1.0, 0.0), (0.0, 1.0)), self.vector, domain=self.domain)

    def _apply(self, P: np.ndarray) -> np.ndarray:
        return P + np.array(self.vector)

    def lipschitz(self, box: Optional[Box] = None) -> float:
        return 1.0

    def image_box(self, box: Box) -> Box:
        return self.as_affine().image_box(box)

    def inverse(self) -> "Translate":
        domain = self.image_box(self.domain) if self.domain.is_bounded else Box.everywhere()
        return Translate((-self.vector[0], -self.vector[1]), domain=domain)

    def params(self) -> Dict[str, Any]:
        return {"vector": list(self.vector)}


@dataclass(frozen=True)
class Compose(MapExpr):
    """Composition; factors[0] is applied first."""
    factors: Tuple[MapExpr, ...] = ()

    kind = "COMPOSE"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InputError("composition needs at least one factor")
        object.__setattr__(self, "factors", factors)
        if not self.domain.is_bounded and factors[0].domain.is_bounded:
            object.__setattr__(self, "domain", factors[0].domain)
        for k in range(len(factors) - 1):
            src, dst = factors[k], factors[k + 1]
            if not (src.domain.is_bounded and dst.domain.is_bounded):
                continue
            ring, _ = src.domain.boundary().densify(max(src.domain.diameter, 1e-9) / 256.0)
            if not dst.domain.contains_many(src.evaluate_many(ring), pad=DOMAIN_PAD).all():
                raise InputError(f"factor {k} maps its domain boundary outside the domain of factor {k + 1}")

    def _apply(self, P: np.ndarray) -> np.ndarray:
        for f in self.factors:
            P = f.evaluate_many(P)
        return P

    def lipschitz(self, box: Optional[Box] = None) -> Optional[float]:
        box = box or self.domain
        total = 1.0
        for f in self.factors:
            L = f.lipschitz(box)
            if L is None:
                return None
            total *= L
            box = f.image_box(box)
        return total

    def image_box(self, box: Box) -> Box:
        for f in self.factors:
            box = f.image_box(box)
        return box

    def inverse(self) -> "Compose":
        return Compose(tuple(f.inverse() for f in reversed(self.factors)))


@dataclass(frozen=True)
class GridPL(MapExpr):
    """Identity plus a bilinearly interpolated displacement field on a node grid.

    dx and dy are row-major: node (i, j) sits at origin + (i*pitch_x, j*pitch_y)
    and its value is stored at index j*nx + i.
    """
    origin: Tuple[float, float] = (0.0, 0.0)
    pitch: Tuple[float, float] = (1.0, 1.0)
    shape: Tuple[int, int] = (2, 2)
    dx: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    dy: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)

    kind = "GRID_PL"

    def __post_init__(self):
        nx, ny = (int(v) for v in self.shape)
        if nx < 2 or ny < 2:
            raise InputError("grid needs at least 2x2 nodes")
        if not all(p > 0 for p in self.pitch):
            raise InputError("grid pitch must be positive")
        if len(self.dx) != nx * ny or len(self.dy) != nx * ny:
            raise InputError(f"grid expects {nx * ny} displacement values per component")
        if not (np.isfinite(self.dx).all() and np.isfinite(self.dy).all()):
            raise InputError("grid displacements must be finite")
        object.__setattr__(self, "shape", (nx, ny))
        object.__setattr__(self, "origin", as_point(self.origin))
        object.__setattr__(self, "pitch", as_point(self.pitch))
        object.__setattr__(self, "dx", tuple(float(v) for v in self.dx))
        object.__setattr__(self, "dy", tuple(float(v) for v in self.dy))
        x0, y0 = self.origin
        object.__setattr__(self, "domain", Box(x0, y0, x0 + (nx - 1) * self.pitch[0], y0 + (ny - 1) * self.pitch[1]))

    @classmethod
    def from_function(cls, fn, box: Box, pitch: float) -> "GridPL":
        """Sample a vectorized map on a node grid over `box`."""
        nx = int(round(box.width / pitch)) + 1
        ny = int(round(box.height / pitch)) + 1
        gx, gy = np.meshgrid(box.xmin + pitch * np.arange(nx), box.ymin + pitch * np.arange(ny))
        nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
        disp = np.asarray(fn(nodes), dtype=float) - nodes
        return cls(origin=(box.xmin, box.ymin), pitch=(pitch, pitch), shape=(nx, ny),
                   dx=tuple(disp[:, 0]), dy=tuple(disp[:, 1]))

    def _grids(self) -> Tuple[np.ndarray, np.ndarray]:
        nx, ny = self.shape
        return np.array(self.dx).reshape(ny, nx), np.array(self.dy).reshape(ny, nx)

    def _apply(self, P: np.ndarray) -> np.ndarray:
        nx, ny = self.shape
        gx, gy = self._grids()
        u = (P[:, 0] - self.origin[0]) / self.pitch[0]
        v = (P[:, 1] - self.origin[1]) / self.pitch[1]
        i = np.clip(np.floor(u).astype(int), 0, nx - 2)
        j = np.clip(np.floor(v).astype(int), 0, ny - 2)
        s = np.clip(u - i, 0.0, 1.0)
        t = np.clip(v - j, 0.0, 1.0)
        out = P.copy()
        for k, g in enumerate((gx, gy)):
            out[:, k] += (
                (1 - s) * (1 - t) * g[j, i] + s * (1 - t) * g[j, i + 1]
                + (1 - s) * t * g[j + 1, i] + s * t * g[j + 1, i + 1]
            )
        return out

    def lipschitz(self, box: Optional[Box] = None) -> float:
        """1 + bound on the displacement Jacobian over the cells meeting `box`."""
        nx, ny = self.shape
        px, py = self.pitch
        i0, i1, j0, j1 = 0, nx - 2, 0, ny - 2
        if box is not None and box.is_bounded:
            i0 = int(np.clip(math.floor((box.xmin - self.origin[0]) / px), 0, nx - 2))
            i1 = int(np.clip(math.floor((box.xmax - self.origin[0]) / px), 0, nx - 2))
            j0 = int(np.clip(math.floor((box.ymin - self.origin[1]) / py), 0, ny - 2))
            j1 = int(np.clip(math.floor((box.ymax - self.origin[1]) / py), 0, ny - 2))
        bound = 0.0
        for g in self._grids():
            sub = g[j0:j1 + 2, i0:i1 + 2]
            ddx = np.abs(np.diff(sub, axis=1)).max() / px
            ddy = np.abs(np.diff(sub, axis=0)).max() / py
            bound += ddx ** 2 + ddy ** 2
        return 1.0 + math.sqrt(bound)

    def params(self) -> Dict[str, Any]:
        return {"origin": list(self.origin), "pitch": list(self.pitch), "shape": list(self.shape)}


@dataclass(frozen=True)
class FoldMap(MapExpr):
    """(r, s) -> (g(r), s + dist(r, Z)), g a shift on (-inf, n-1] folding [n-1, inf) back through g(n) = 1."""
    n: int = 2
    shear: bool = True

    kind = "FOLD"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InputError("the fold map needs an integer n >= 2")
        object.__setattr__(self, "n", int(self.n))

    def g(self, r: np.ndarray) -> np.ndarray:
        n = self.n
        return np.where(r <= n - 1, r + 1.0, n + (1.0 - n) * (r - (n - 1)))

    def _apply(self, P: np.ndarray) -> np.ndarray:
        r, s = P[:, 0], P[:, 1]
        if self.shear:
            s = s + np.abs(r - np.round(r))
        return np.stack([self.g(r), s], axis=1)

    def lipschitz(self, box: Optional[Box] = None) -> float:
        slope = max(1.0, float(self.n - 1))
        return math.sqrt(slope ** 2 + 2.0) if self.shear else slope

    def params(self) -> Dict[str, Any]:
        return {"n": self.n, "shear": self.shear}


@dataclass(frozen=True)
class SpiralMap(MapExpr):
    """z -> lambda exp(i beta) z with lambda = 2^(1/(n+1))."""
    n: int = 1
    beta: float = 1.9

    kind = "SPIRAL"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputError("the spiral map needs an integer n >= 1")
        object.__setattr__(self, "n", int(self.n))

    @property
    def lam(self) -> float:
        return 2.0 ** (1.0 / (self.n + 1))

    def as_affine(self) -> Affine:
        return ComplexScaleRot(self.lam, self.beta, domain=self.domain).as_affine()

    def _apply(self, P: np.ndarray) -> np.ndarray:
        return self.as_affine()._apply(P)

    def lipschitz(self, box: Optional[Box] = None) -> float:
        return self.lam

    def image_box(self, box: Box) -> Box:
        return self.as_affine().image_box(box)

    def inverse(self) -> ComplexScaleRot:
        return ComplexScaleRot(self.lam, self.beta).inverse()

    def params(self) -> Dict[str, Any]:
        return {"n": self.n, "beta": self.beta}


IDENTITY = Affine()


def conjugate(f: MapExpr, h: MapExpr) -> Compose:
    """h o f o h^-1, for an invertible affine-type h."""
    return Compose((h.inverse(), f, h))


def spot_check_lipschitz(f: MapExpr, box: Box, pairs: int = 2000, seed: int = 0) -> float:
    """Largest observed |f(p) - f(q)| / |p - q| over random pairs in box."""
    rng = np.random.default_rng(seed)
    lo, hi = np.array(box.lower_left), np.array([box.xmax, box.ymax])
    P = rng.uniform(lo, hi, size=(pairs, 2))
    Q = rng.uniform(lo, hi, size=(pairs, 2))
    num = np.hypot(*(f.evaluate_many(P) - f.evaluate_many(Q)).T)
    den = np.hypot(*(P - Q).T)
    ok = den > 0
    return float((num[ok] / den[ok]).max())


# ============ IMAGES AND ORBITS ============
@dataclass(frozen=True)
class ImagedCurve:
    polyline: Polyline
    source_params: np.ndarray = field(repr=False)
    certified: bool = True


def image_polyline(f: MapExpr, c: Polyline, chord_tol: float) -> ImagedCurve:
    """Image of a polyline through adaptively split source segments."""
    if chord_tol <= 0:
        raise InputError("chord_tol must be positive")
    if c.is_point:
        return ImagedCurve(Polyline((as_point(f.evaluate(c.loop[0])),)), np.zeros(1), True)
    L = f.lipschitz(c.bbox)
    certified = L is not None
    if not certified:
        LOGGER.warning(f"⚠️ no Lipschitz bound for {f.kind}; imaging at fixed depth {FIXED_DEPTH}")
    loop, cum = c.loop, c.params
    pts, ts = [], []
    for k, seglen in enumerate(c.seg_lengths):
        if certified:
            pieces = max(1, int(math.ceil(L * seglen / chord_tol * (1.0 + 1e-9))))
        else:
            pieces = FIXED_DEPTH
        frac = np.arange(pieces) / pieces
        pts.append(loop[k] + frac[:, None] * (loop[k + 1] - loop[k]))
        ts.append(cum[k] + frac * (cum[k + 1] - cum[k]))
    pts.append(loop[-1:])
    ts.append(np.array([1.0]))
    src = np.vstack(pts)
    params = np.concatenate(ts)
    if len(src) > Config.MAX_SAMPLES:
        raise RefinementError(f"imaging needs {len(src)} samples")
    img = f.evaluate_many(src)
    keep = np.ones(len(img), dtype=bool)
    keep[1:] = np.any(img[1:] != img[:-1], axis=1)
    img, params = img[keep], params[keep]
    if c.closed:
        if len(img) > 1 and np.array_equal(img[0], img[-1]):
            img, params = img[:-1], params[:-1]
        if len(img) < 3:
            raise InputError("image of a closed curve collapsed")
    out = Polyline.from_array(img, closed=c.closed) if len(img) > 1 or c.closed else Polyline((as_point(img[0]),))
    return ImagedCurve(out, params, certified)


@dataclass(frozen=True)
class Orbit:
    points: Tuple[Tuple[float, float], ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.points)

    def array(self) -> np.ndarray:
        return np.array(self.points)


def orbit(f: MapExpr, x: Any, m: int) -> Orbit:
    """[x, f(x), ..., f^m(x)], cut short if an iterate leaves the domain."""
    if m < 0:
        raise InputError("orbit length must be non-negative")
    pts = [as_point(x)]
    p = xy(x)
    for k in range(m):
        try:
            p = f.evaluate(p)
        except DomainError as e:
            LOGGER.debug(f"Orbit left the domain after {k} steps: {e}")
            return Orbit(tuple(pts), True)
        pts.append(as_point(p))
    return Orbit(tuple(pts), False)


def is_periodic(f: MapExpr, x: Any, m: int, eps: float) -> bool:
    o = orbit(f, x, m)
    if o.truncated:
        return False
    return math.dist(o.points[0], o.points[-1]) <= eps


# ============ SAMPLED PREDICATES ============
def _tube_mask(P: np.ndarray, centers: Sequence[np.ndarray], radius: float) -> np.ndarray:
    mask = np.zeros(len(P), dtype=bool)
    for c in centers:
        mask |= np.hypot(*(P - c).T) < radius
    return mask


def _bisect_witness(f: MapExpr, a: np.ndarray, b: np.ndarray, TA: np.ndarray, TB: np.ndarray,
                    scale: float) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Halve the source chord a-b while its image chord keeps crossing the target."""
    fa, fb = f.evaluate_many(np.stack([a, b]))
    for _ in range(WITNESS_STEPS):
        if np.hypot(*(fb - fa)) <= 1e-12 * scale:
            break
        m = 0.5 * (a + b)
        fm = f.evaluate(m)
        if len(find_crossings(np.stack([fa]), np.stack([fm]), TA, TB)):
            b, fb = m, fm
        elif len(find_crossings(np.stack([fm]), np.stack([fb]), TA, TB)):
            a, fa = m, fm
        else:
            return None
    return a, fa


def _separation(
    f: MapExpr,
    src: np.ndarray,
    target: Polyline,
    tol: Tolerances,
    exclude: Sequence[Any] = (),
) -> TriState:
    """Is the sampled image of src kept eps_sep away from the target curve?"""
    img = f.evaluate_many(src)
    centers = [xy(p) for p in exclude]
    drop = _tube_mask(img, centers, tol.tube) if centers else np.zeros(len(img), dtype=bool)
    keep = ~drop
    if not keep.any():
        return TriState.undecided(tol.tube, note="every sample lies in an excluded tube")
    scale = max(target.bbox.diameter, 1.0)

    if target.is_point:
        TA = TB = target.loop[:1]
    else:
        TA, TB = target.segments()
    dist = nearest_on_segments(img[keep], TA, TB)[0]
    k = int(np.argmin(dist))
    margin = float(dist[k])
    if margin >= tol.eps_sep:
        return TriState.satisfied(margin, resolution=tol.h_sample)

    # exact crossings of consecutive image chords, both ends outside the tubes
    chord_ok = keep[:-1] & keep[1:]
    idx = np.flatnonzero(chord_ok)
    if idx.size:
        hits = find_crossings(img[idx], img[idx + 1], TA, TB)
        for i, _ in hits:
            s = idx[i]
            found = _bisect_witness(f, src[s], src[s + 1], TA, TB, scale)
            if found is not None:
                p, fp = found
                return TriState.violated(p, fp, note="image meets target")
    if margin <= 1e-12 * scale:
        p = src[np.flatnonzero(keep)[k]]
        return TriState.violated(p, f.evaluate(p), note="image touches target")
    return TriState.undecided(tol.h_sample, note=f"closest approach {margin:.3g} below eps_sep")


def is_moving(f: MapExpr, V: Polyline, tol: Tolerances, open_ends: bool = False) -> TriState:
    """f(V) and V disjoint; open_ends drops tubes around the images of V's endpoints."""
    src, _ = V.densify(tol.h_sample)
    exclude = [f.evaluate(V.start), f.evaluate(V.end)] if open_ends else []
    state = _separation(f, src, V, tol, exclude)
    LOGGER.debug(f"is_moving: {state.verdict.value} margin={state.margin}")
    return state


def dodges(
    f: MapExpr,
    V: Polyline,
    W: Polyline,
    tol: Tolerances,
    open_ends: bool = False,
    exclude: Sequence[Any] = (),
) -> TriState:
    """f(V) and W disjoint."""
    src, _ = V.densify(tol.h_sample)
    centers = list(exclude)
    if open_ends:
        centers += [f.evaluate(V.start), f.evaluate(V.end)]
    state = _separation(f, src, W, tol, centers)
    LOGGER.debug(f"dodges: {state.verdict.value} margin={state.margin}")
    return state


def region_samples(E: Region, pitch: float) -> np.ndarray:
    """Grid points of a box or closed-polyline region at the given pitch."""
    box = E if isinstance(E, Box) else E.bbox
    if not box.is_bounded:
        raise InputError("region must be bounded")
    nx = max(2, int(math.ceil(box.width / pitch)) + 1)
    ny = max(2, int(math.ceil(box.height / pitch)) + 1)
    if nx * ny > 16 * Config.MAX_SAMPLES:
        raise RefinementError(f"region grid of {nx}x{ny} points is too large")
    gx, gy = np.meshgrid(np.linspace(box.xmin, box.xmax, nx), np.linspace(box.ymin, box.ymax, ny))
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    if isinstance(E, Polyline):
        if not E.closed:
            raise InputError("region polyline must be closed")
        pts = pts[points_in_polygon(E.array, pts)]
    return pts


def exclusive_in(f: MapExpr, V: Polyline, E: Region, tol: Tolerances, trim_ends: bool = True) -> TriState:
    """f(E - V) misses f(V), sampled off a 2 eps_sep tube around V."""
    grid = region_samples(E, tol.h_sample)
    grid = grid[V.distance_many(grid) >= 2.0 * tol.eps_sep]
    vs, _ = V.densify(tol.h_sample)
    if trim_ends and not V.is_point:
        vs = vs[~_tube_mask(vs, [V.start, V.end], tol.tube)]
    if len(grid) == 0 or len(vs) == 0:
        return TriState.undecided(tol.h_sample, note="nothing left to sample")
    fv = f.evaluate_many(vs)
    fg = f.evaluate_many(grid)
    dist, k = cKDTree(fv).query(fg)
    i = int(np.argmin(dist))
    margin = float(dist[i])
    if margin >= tol.eps_sep:
        return TriState.satisfied(margin, resolution=tol.h_sample)
    if margin <= 1e-12 * max(Box.around(fv).diameter, 1.0):
        return TriState.violated(grid[i], vs[k[i]], note="distinct points share an image")
    return TriState.undecided(tol.h_sample, note=f"images approach within {margin:.3g}")


@dataclass(frozen=True)
class InjectivityMargin:
    margin: float
    witness: Optional[Tuple[Tuple[float, float], Tuple[float, float]]]
    eps: float

    @property
    def injective(self) -> bool:
        return self.margin > 0


def injectivity_margin(f: MapExpr, samples: Any, eps: Optional[float] = None) -> InjectivityMargin:
    """Smallest image distance over sample pairs at source distance >= eps."""
    src = np.asarray(samples, dtype=float).reshape(-1, 2)
    eps = 2.0 * Config.H_SAMPLE if eps is None else eps
    img = f.evaluate_many(src)
    if len(src) < 2:
        return InjectivityMargin(math.inf, None, eps)
    tree = cKDTree(img)
    limit = Box.around(img).diameter
    r = max(eps, 1e-12)
    floor = eps * (1.0 - 1e-9)
    while True:
        pairs = tree.query_pairs(r, output_type="ndarray")
        if len(pairs):
            far = np.hypot(*(src[pairs[:, 0]] - src[pairs[:, 1]]).T) >= floor
            pairs = pairs[far]
        if len(pairs):
            d = np.hypot(*(img[pairs[:, 0]] - img[pairs[:, 1]]).T)
            k = int(np.argmin(d))
            i, j = sorted(pairs[k])
            margin = float(d[k])
            if margin <= 1e-12 * max(limit, 1.0):
                margin = 0.0
            return InjectivityMargin(margin, (as_point(src[i]), as_point(src[j])), eps)
        if r > limit:
            return InjectivityMargin(math.inf, None, eps)
        r *= 2.0


def disc_samples(center: Any, radius: float, pitch: float) -> np.ndarray:
    c = xy(center)
    n = max(2, int(math.ceil(2 * radius / pitch)) + 1)
    g = np.linspace(-radius, radius, n)
    gx, gy = np.meshgrid(g, g)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    return c + pts[np.hypot(*pts.T) <= radius]


def local_orientation(f: MapExpr, center: Any, radius: float, samples: int = 64) -> Orientation:
    """Orientation of f on a small disc, read off the image of its boundary circle."""
    circle = circle_polyline(center, radius, samples)
    try:
        inj = injectivity_margin(f, disc_samples(center, radius, radius / 8.0), eps=radius / 8.0)
        if not inj.injective:
            LOGGER.debug(f"local_orientation: not injective near {as_point(center)}")
            return Orientation.UNDECIDED
        img = f.evaluate_many(circle.array)
        image = Polyline.from_array(img, closed=True)
        if len(image.vertices) != len(circle.vertices) or not is_simple(image)[0]:
            return Orientation.UNDECIDED
        return orientation_of_embedding(DirectedCircle(circle), DirectedCircle(image))
    except PlanefixError as e:
        LOGGER.debug(f"local_orientation undecided: {e}")
        return Orientation.UNDECIDED
