import math

import numpy as np
import pytest

from planefix.modules.geom import (
    ON_CURVE,
    Box,
    CurveSet,
    Point,
    Polyline,
    Tolerances,
    _check_pinches,
    concat_polylines,
    decompose_complement,
    faces_of,
    find_crossings,
    intersection_point,
    is_simple,
    orient2d,
    orient2d_many,
    point_in_face,
    points_in_polygon,
    segments_intersect,
    signed_area,
    subarc,
)
from planefix.utils import InputError, ResolutionError


def square(x0=0.0, y0=0.0, side=1.0) -> Polyline:
    return Polyline(((x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)), closed=True)


# ============ PREDICATES ============
def test_orient2d_signs():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0


def test_orient2d_exact_on_near_collinear_points():
    assert orient2d((0.5, 0.5), (12.0, 12.0), (24.0, 24.0)) == 0
    # the float determinant is below its error bound here
    assert orient2d((0.0, 0.0), (1.0, 1.0), (3.0, 3.0 + 2.0 ** -50)) == 1
    assert orient2d((0.0, 0.0), (1.0, 1.0), (3.0, 3.0 - 2.0 ** -50)) == -1


def test_orient2d_many_matches_scalar():
    rng = np.random.default_rng(7)
    A, B, C = (rng.uniform(-1, 1, size=(500, 2)) for _ in range(3))
    # near-collinear triples go through the exact fallback
    C[:50] = A[:50] + 2.0 * (B[:50] - A[:50])
    many = orient2d_many(A, B, C)
    assert list(many) == [orient2d(a, b, c) for a, b, c in zip(A, B, C)]


@pytest.mark.parametrize(
    "p1, p2, q1, q2, expected",
    [
        ((0, 0), (2, 2), (0, 2), (2, 0), True),
        ((0, 0), (1, 0), (1, 0), (1, 1), True),
        ((0, 0), (1, 0), (0, 1), (1, 1), False),
        ((0, 0), (2, 0), (1, 0), (3, 0), True),
        ((0, 0), (1, 0), (2, 0), (3, 0), False),
    ],
)
def test_segments_intersect(p1, p2, q1, q2, expected):
    assert segments_intersect(p1, p2, q1, q2) is expected


def test_intersection_point_parameters():
    p, t, u = intersection_point((0, 0), (2, 2), (0, 2), (2, 0))
    assert np.allclose(p, (1, 1))
    assert t == pytest.approx(0.5) and u == pytest.approx(0.5)


def test_find_crossings_pairs():
    A1 = np.array([[0.0, 0.0], [0.0, 1.0]])
    B1 = np.array([[2.0, 2.0], [2.0, 1.0]])
    A2 = np.array([[0.0, 2.0], [5.0, 5.0]])
    B2 = np.array([[2.0, 0.0], [6.0, 6.0]])
    pairs = find_crossings(A1, B1, A2, B2)
    assert pairs.tolist() == [[0, 0], [1, 0]]


def test_signed_area_and_membership():
    sq = square()
    assert signed_area(sq.array) == pytest.approx(1.0)
    assert signed_area(sq.reversed().array) == pytest.approx(-1.0)
    inside = points_in_polygon(sq.array, np.array([[0.5, 0.5], [1.5, 0.5], [-0.1, 0.9]]))
    assert inside.tolist() == [True, False, False]


# ============ POLYLINES ============
def test_polyline_closing_vertex_is_dropped():
    p = Polyline(((0, 0), (1, 0), (1, 1), (0, 0)), closed=True)
    assert len(p) == 3
    assert p.loop.shape == (4, 2)


@pytest.mark.parametrize(
    "vertices, closed",
    [
        (((0, 0), (0, 0), (1, 0)), False),
        (((0, 0), (1, 0)), True),
        ((), False),
        (((0, 0), (math.nan, 1)), False),
    ],
)
def test_polyline_rejects_bad_input(vertices, closed):
    with pytest.raises(InputError):
        Polyline(vertices, closed)


def test_arclength_parameter():
    p = Polyline(((0, 0), (1, 0), (1, 1)))
    assert p.params.tolist() == [0.0, 0.5, 1.0]
    assert np.allclose(p.point_at(0.75), (1.0, 0.5))
    t, d = p.project((0.5, -1.0))
    assert t == pytest.approx(0.25) and d == pytest.approx(1.0)
    with pytest.raises(InputError):
        p.point_at(1.5)


def test_densify_keeps_vertices_and_spacing():
    p = Polyline(((0, 0), (1, 0), (1, 2)))
    pts, ts = p.densify(0.3)
    assert np.all(np.hypot(*np.diff(pts, axis=0).T) <= 0.3 + 1e-12)
    for v in p.array:
        assert np.min(np.hypot(*(pts - v).T)) == 0.0
    assert ts[0] == 0.0 and ts[-1] == 1.0
    assert np.all(np.diff(ts) > 0)


def test_is_simple():
    assert is_simple(square()) == (True, None)
    figure_eight = Polyline(((0, 0), (1, 1), (1, 0), (0, 1)), closed=True)
    simple, pair = is_simple(figure_eight)
    assert not simple and pair is not None
    backtrack = Polyline(((0, 0), (2, 0), (1, 0)))
    assert is_simple(backtrack) == (False, (0, 1))


def test_subarc_and_concat():
    p = Polyline(((0, 0), (2, 0), (2, 2)))
    mid = subarc(p, 0.25, 0.75)
    assert np.allclose(mid.start, (1, 0)) and np.allclose(mid.end, (2, 1))
    assert len(mid) == 3
    assert subarc(p, 0.5, 0.5).is_point
    joined = concat_polylines([subarc(p, 0.0, 0.5), subarc(p, 0.5, 1.0)])
    assert joined == p


# ============ POINTS ============
def test_point_is_a_finite_pair():
    p = Point(1.5, -2.0)
    assert tuple(p) == (1.5, -2.0) and p[1] == -2.0
    assert np.array_equal(np.asarray(p), [1.5, -2.0])
    assert orient2d(Point(0.0, 0.0), Point(1.0, 0.0), p) < 0
    with pytest.raises(InputError):
        Point(math.nan, 0.0)


# ============ BOXES AND TOLERANCES ============
def test_box_operations():
    b = Box(0, 0, 4, 2)
    left, right = b.split()
    assert left == Box(0, 0, 2, 2) and right == Box(2, 0, 4, 2)
    assert b.corners()[0].tolist() == [0, 0] and signed_area(b.corners()) > 0
    assert b.union(Box(-1, 1, 1, 3)) == Box(-1, 0, 4, 3)
    assert not Box.everywhere().is_bounded
    with pytest.raises(InputError):
        Box(1, 0, 0, 1)


def test_tolerances_validation():
    tol = Tolerances.from_config(eps_sep=0.05, tol_fix=None)
    assert tol.eps_sep == 0.05
    assert tol.tube == pytest.approx(tol.tube_factor * 0.05)
    with pytest.raises(InputError):
        Tolerances(eps_sep=0.0)
    with pytest.raises(InputError):
        Tolerances(tube_factor=0.5)
    tol.check_lipschitz(1.0)
    with pytest.raises(InputError):
        Tolerances(eps_sep=0.01, h_sample=0.01).check_lipschitz(1.0)


# ============ COMPLEMENT DECOMPOSITION ============
def test_square_has_one_bounded_face():
    d = decompose_complement([square()], Box(-0.5, -0.5, 1.5, 1.5), 0.05)
    assert len(d.faces) == 2
    (inner,) = d.bounded_faces()
    assert point_in_face(d, (0.5, 0.5)) == inner.index
    assert point_in_face(d, (1.4, -0.4)) == d.unbounded_index
    assert point_in_face(d, (0.5, 0.0)) == ON_CURVE
    area = sum(w * h for _, _, w, h in d.face_runs(inner.index))
    assert 0.7 < area < 1.0


def test_two_squares_two_bounded_faces():
    curves = [square(), square(2.0, 0.0)]
    d = decompose_complement(curves, Box(-0.5, -0.5, 3.5, 1.5), 0.05)
    assert len(d.bounded_faces()) == 2
    labels = faces_of(d, np.array([[0.5, 0.5], [2.5, 0.5], [1.5, 0.5]]))
    assert labels[0] != labels[1]
    assert labels[2] == d.unbounded_index


def test_circle_with_a_diameter_has_two_bounded_faces(unit_circle):
    chord = Polyline(((-1.0, 0.0), (1.0, 0.0)))
    d = decompose_complement([unit_circle, chord], Box(-1.5, -1.5, 1.5, 1.5), 0.05)
    assert len(d.faces) == 3
    assert len(d.bounded_faces()) == 2
    upper, lower, outside = faces_of(d, np.array([[0.0, 0.5], [0.0, -0.5], [1.4, 1.4]]))
    assert len({upper, lower, outside}) == 3
    assert outside == d.unbounded_index


def test_an_open_arc_does_not_separate_the_plane():
    arc = Polyline(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    d = decompose_complement([arc], Box(-0.5, -0.5, 1.5, 1.5), 0.05)
    assert len(d.faces) == 1
    assert d.bounded_faces() == []
    assert point_in_face(d, (0.5, 0.5)) == d.unbounded_index


@pytest.mark.parametrize(
    "curves, pinched",
    [
        ([], True),
        ([Polyline(((1.5, -1.0), (1.5, 3.0)))], False),
        ([Polyline(((1.5, -1.0), (1.5, 1.0)))], True),
    ],
)
def test_pinch_check_looks_at_every_crossing(curves, pinched):
    comp = np.array([[0, -1, 1], [0, -1, 1]])

    def center(i, j):
        return np.array([i + 0.5, j + 0.5])

    if pinched:
        with pytest.raises(ResolutionError, match="pinch"):
            _check_pinches(comp, comp < 0, CurveSet(curves), center)
    else:
        _check_pinches(comp, comp < 0, CurveSet(curves), center)


def test_decomposition_needs_a_margin():
    with pytest.raises(InputError):
        decompose_complement([square()], Box(0, 0, 1, 1), 0.05)
