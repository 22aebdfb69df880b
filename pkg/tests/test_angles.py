import math

import numpy as np
import pytest

from planefix.modules.angles import (
    DirectedArc,
    DirectedCircle,
    Orientation,
    SampledPath,
    Side,
    circle_polyline,
    directed_angle,
    interior_point,
    orientation_of_embedding,
    overall_sense,
    rotational_angle,
    side_of_directed_arc,
    side_of_directed_circle,
    winding_number,
)
from planefix.modules.geom import Polyline, points_in_polygon, signed_area
from planefix.utils import DegenerateAngleError, InputError, UndefinedAngleError


def star_polygon(rng: np.random.Generator, n: int = 12) -> Polyline:
    """Random star-shaped polygon about the origin, anticlockwise."""
    th = 2.0 * math.pi * (np.arange(n) + rng.uniform(0.0, 0.8, n)) / n
    r = rng.uniform(0.5, 1.5, n)
    return Polyline.from_array(np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=True)


# ============ DIRECTED ANGLES ============
def test_directed_angle_quarter_turn():
    assert directed_angle((0, 0), (1, 0), (0, 1)) == pytest.approx(math.pi / 2)
    assert directed_angle((0, 0), (0, 1), (1, 0)) == pytest.approx(-math.pi / 2)


def test_directed_angle_antisymmetry():
    rng = np.random.default_rng(2024)
    pts = rng.uniform(-10, 10, size=(10_000, 3, 2))
    for v, x, y in pts:
        assert abs(directed_angle(v, x, y) + directed_angle(v, y, x)) <= 1e-12


@pytest.mark.parametrize("x, y", [((1, 0), (-1, 0)), ((0, 0), (1, 1)), ((2, 2), (0, 0))])
def test_directed_angle_degenerate(x, y):
    with pytest.raises(DegenerateAngleError):
        directed_angle((0, 0), x, y)


# ============ ROTATIONAL ANGLES ============
def test_rotational_angle_of_the_unit_circle(unit_circle):
    assert rotational_angle(unit_circle, (0, 0)) == pytest.approx(2 * math.pi, abs=1e-12)
    assert rotational_angle(unit_circle, (3, 0)) == pytest.approx(0.0, abs=1e-12)


def test_rotational_angle_refinement_invariance():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 100:
        verts = rng.uniform(-1, 1, size=(6, 2))
        v = rng.uniform(-1.5, 1.5, size=2)
        p = Polyline.from_array(verts)
        if p.distance_many(v[None])[0] < 0.1:
            continue
        dense, _ = p.densify(0.01)
        coarse = rotational_angle(SampledPath.from_points(p.loop), v)
        fine = rotational_angle(SampledPath.from_points(dense), v)
        assert abs(coarse - fine) <= 1e-9
        checked += 1


def test_rotational_angle_refuses_near_paths(unit_circle):
    with pytest.raises(UndefinedAngleError):
        rotational_angle(unit_circle, (1.0, 0.0))


def test_rotational_angle_of_a_function_path():
    def half_turn(ts):
        th = math.pi * ts
        return np.stack([np.cos(th), np.sin(th)], axis=1)

    path = SampledPath.from_function(half_turn, samples=4)
    assert rotational_angle(path, (0, 0)) == pytest.approx(math.pi, abs=1e-12)


# ============ WINDING ============
def test_winding_number_unit_circle(unit_circle):
    c = DirectedCircle(unit_circle)
    assert winding_number(c, (0, 0)) == 1
    assert winding_number(c.reversed(), (0, 0)) == -1
    assert winding_number(c, (2, 0)) == 0
    assert winding_number(DirectedCircle(unit_circle, start_vertex=17), (0.2, -0.1)) == 1


def test_winding_needs_a_closed_curve():
    with pytest.raises(InputError):
        DirectedCircle(Polyline(((0, 0), (1, 0), (1, 1))))


def test_shoelace_agrees_with_winding():
    rng = np.random.default_rng(5)
    for _ in range(50):
        star = star_polygon(rng)
        for curve in (star, star.reversed()):
            area = signed_area(curve.array)
            sense = overall_sense(curve)
            assert (area > 0) == (sense > 0)
            p = interior_point(curve)
            assert points_in_polygon(curve.array, p[None])[0]
            assert winding_number(DirectedCircle(curve), p, min_distance=1e-9) == sense


# ============ SIDES AND ORIENTATION ============
def test_side_of_directed_circle(unit_circle):
    c = DirectedCircle(unit_circle)
    assert side_of_directed_circle(c, (0, 0)) is Side.LEFT
    assert side_of_directed_circle(c, (2, 0)) is Side.RIGHT
    assert side_of_directed_circle(c.reversed(), (2, 0)) is Side.LEFT
    with pytest.raises(InputError):
        side_of_directed_circle(c, (1, 0))


@pytest.mark.parametrize(
    "matrix, preserving",
    [
        (((2.0, 0.5), (0.0, 1.0)), True),
        (((0.0, -1.0), (1.0, 0.0)), True),
        (((1.0, 0.0), (0.0, -1.0)), False),
        (((0.3, 1.0), (1.0, 0.2)), False),
    ],
)
def test_side_transport_under_homeomorphisms(unit_circle, matrix, preserving):
    M = np.array(matrix)
    offset = np.array([0.4, -0.7])

    def h(P):
        return np.asarray(P, dtype=float) @ M.T + offset

    c = DirectedCircle(unit_circle)
    image = DirectedCircle(unit_circle.transformed(h))
    for p in [(0.1, 0.2), (-0.5, 0.3), (2.0, 0.0), (0.0, -3.0)]:
        before = side_of_directed_circle(c, p)
        after = side_of_directed_circle(image, h(np.array([p]))[0])
        assert after is (before if preserving else before.flipped())
    expected = Orientation.PRESERVING if preserving else Orientation.REVERSING
    assert orientation_of_embedding(c, image) is expected


def test_side_of_directed_arc():
    sq = DirectedCircle(Polyline(((0, 0), (1, 0), (1, 1), (0, 1)), closed=True))
    along = DirectedArc(Polyline(((-0.5, 0.0), (1.5, 0.0))))
    assert side_of_directed_arc(along, sq) is Side.LEFT
    backwards = DirectedArc(along.curve, start_is_first_vertex=False)
    assert side_of_directed_arc(backwards, sq) is Side.RIGHT
    apart = DirectedArc(Polyline(((-0.5, -1.0), (1.5, -1.0))))
    assert side_of_directed_arc(apart, sq) is Side.NOT_APPLICABLE
    through = DirectedArc(Polyline(((-0.5, 0.5), (1.5, 0.5))))
    assert side_of_directed_arc(through, sq) is Side.NOT_APPLICABLE


def test_circle_polyline_is_anticlockwise():
    c = circle_polyline((1.0, 2.0), 0.5, 32)
    assert len(c) == 32
    assert signed_area(c.array) > 0
    assert overall_sense(c) == 1
