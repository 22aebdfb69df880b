import math

import numpy as np
import pytest

from planefix.modules.angles import Orientation, circle_polyline
from planefix.modules.geom import Box, Polyline, Tolerances, signed_area
from planefix.modules.maps import (
    IDENTITY,
    Affine,
    ComplexScaleRot,
    Compose,
    FoldMap,
    GridPL,
    SpiralMap,
    Translate,
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
    region_samples,
    spot_check_lipschitz,
)
from planefix.utils import DomainError, InputError, Verdict


def rotation(theta: float) -> ComplexScaleRot:
    return ComplexScaleRot(1.0, theta)


# ============ EXPRESSIONS ============
def test_affine_evaluation_and_inverse():
    f = Affine(((2.0, 1.0), (0.0, 1.0)), (1.0, -1.0))
    p = np.array([0.5, 2.0])
    assert np.allclose(f(p), (4.0, 1.0))
    assert np.allclose(f.inverse()(f(p)), p)
    assert f.determinant == pytest.approx(2.0)
    assert f.lipschitz() == pytest.approx(np.linalg.norm(f.M, 2))


def test_affine_fixed_point():
    f = Affine(((2.0, 0.0), (0.0, 3.0)), (1.0, 2.0))
    assert np.allclose(f.fixed_point(), (-1.0, -1.0))
    assert Translate((1.0, 0.0)).as_affine().fixed_point() is None


def test_complex_scale_rot_quarter_turn():
    f = ComplexScaleRot(2.0, math.pi / 2)
    assert np.allclose(f((1.0, 0.0)), (0.0, 2.0))
    assert np.allclose(f.inverse()((0.0, 2.0)), (1.0, 0.0))
    assert f.lipschitz() == 2.0


def test_compose_applies_first_factor_first():
    f = Compose((Translate((1.0, 0.0)), rotation(math.pi / 2)))
    assert np.allclose(f((0.0, 0.0)), (0.0, 1.0))
    assert np.allclose(f.inverse()(f((0.3, -0.2))), (0.3, -0.2))
    assert f.lipschitz(Box(-1, -1, 1, 1)) == pytest.approx(1.0)


def test_compose_checks_domains():
    inner = Affine(((2.0, 0.0), (0.0, 2.0)), domain=Box(0, 0, 1, 1))
    outer = Translate((0.0, 0.0), domain=Box(0, 0, 1.5, 1.5))
    with pytest.raises(InputError):
        Compose((inner, outer))
    with pytest.raises(InputError):
        Compose(())


def test_domain_is_enforced():
    f = Translate((1.0, 0.0), domain=Box(0, 0, 1, 1))
    assert np.allclose(f((1.0, 1.0)), (2.0, 1.0))
    with pytest.raises(DomainError):
        f((1.5, 0.5))


def test_grid_pl_reproduces_affine_maps():
    g = Affine(((1.1, 0.2), (-0.1, 0.9)), (0.3, 0.0))
    box = Box(-1, -1, 1, 1)
    pl = GridPL.from_function(g.evaluate_many, box, 0.25)
    assert pl.domain == box
    rng = np.random.default_rng(3)
    P = rng.uniform(-1, 1, size=(200, 2))
    assert np.allclose(pl.evaluate_many(P), g.evaluate_many(P), atol=1e-12)
    assert pl.lipschitz(box) >= spot_check_lipschitz(pl, box) - 1e-9


def test_grid_pl_validates_shape():
    with pytest.raises(InputError):
        GridPL(shape=(2, 2), dx=(0.0,) * 3, dy=(0.0,) * 4)
    with pytest.raises(InputError):
        GridPL(pitch=(0.0, 1.0))


def test_fold_map_orbit():
    f = FoldMap(3, shear=False)
    o = orbit(f, (1.0, 0.0), 3)
    assert o.points == ((1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (1.0, 0.0))
    assert is_periodic(f, (1.0, 0.0), 3, 1e-12)
    assert f.g(np.array([7.0 / 3.0]))[0] == pytest.approx(7.0 / 3.0)
    sheared = FoldMap(3)
    assert np.allclose(sheared((2.5, 0.0)), (2.0, 0.5))
    with pytest.raises(InputError):
        FoldMap(1)


def test_spiral_map_multiplier():
    f = SpiralMap(3, 1.9)
    assert f.lam == pytest.approx(2.0 ** 0.25)
    z = f((1.0, 0.0))
    assert math.hypot(*z) == pytest.approx(2.0 ** 0.25)
    assert math.atan2(z[1], z[0]) == pytest.approx(1.9)


def test_conjugate_moves_fixed_points():
    f = ComplexScaleRot(1.5, 0.7)
    h = Affine(((1.0, 0.3), (0.0, 1.2)), (2.0, -1.0))
    g = conjugate(f, h)
    assert np.allclose(g(h((0.0, 0.0))), h((0.0, 0.0)))
    p = np.array([0.4, 0.1])
    assert np.allclose(g(h(p)), h(f(p)))


# ============ IMAGES AND ORBITS ============
def test_image_polyline_chords_are_short(unit_circle):
    f = ComplexScaleRot(2.0, 0.3)
    img = image_polyline(f, unit_circle, 0.05)
    assert img.certified and img.polyline.closed
    assert np.all(img.polyline.seg_lengths <= 0.05 + 1e-9)
    assert np.allclose(np.hypot(*img.polyline.array.T), 2.0, atol=1e-2)


def test_image_polyline_of_a_point():
    img = image_polyline(Translate((1.0, 2.0)), Polyline(((0.0, 0.0),)), 0.1)
    assert img.polyline.is_point
    assert img.polyline.vertices == ((1.0, 2.0),)


def test_orbit_truncates_at_the_domain():
    f = Translate((1.0, 0.0), domain=Box(0, 0, 2.5, 1))
    o = orbit(f, (0.0, 0.0), 5)
    assert o.truncated and len(o) == 4
    assert o.points[-1] == (3.0, 0.0)
    assert not is_periodic(f, (0.0, 0.0), 5, 1e-9)
    with pytest.raises(InputError):
        orbit(f, (0.0, 0.0), -1)


# ============ SAMPLED PREDICATES ============
def test_is_moving_for_translations():
    tol = Tolerances(eps_sep=0.03, h_sample=0.01)
    V = Polyline(((0.0, 0.0), (1.0, 0.0)))
    moving = is_moving(Translate((0.0, 0.5)), V, tol)
    assert moving.verdict is Verdict.SATISFIED
    assert moving.margin == pytest.approx(0.5)
    rot = is_moving(ComplexScaleRot(1.0, math.pi / 2), Polyline(((-1.0, 0.0), (1.0, 0.0))), tol)
    assert rot.verdict is Verdict.VIOLATED


def test_dodges_reports_a_witness():
    tol = Tolerances(eps_sep=0.03, h_sample=0.01)
    V = Polyline(((0.0, 0.0), (1.0, 0.0)))
    W = Polyline(((0.5, 0.5), (0.5, 2.0)))
    hit = dodges(Translate((0.0, 1.0)), V, W, tol)
    assert hit.verdict is Verdict.VIOLATED
    p, fp = hit.witness
    assert fp[0] == pytest.approx(0.5, abs=1e-6)
    assert dodges(Translate((0.0, -1.0)), V, W, tol).verdict is Verdict.SATISFIED
    close = dodges(Translate((0.0, 0.49)), V, W, tol)
    assert close.verdict is Verdict.UNDECIDED


def test_exclusive_in_for_injective_and_folding_maps():
    tol = Tolerances(eps_sep=0.03, h_sample=0.02)
    E = Box(-1, -1, 1, 1)
    V = Polyline(((-0.5, 0.0), (0.5, 0.0)))
    assert exclusive_in(ComplexScaleRot(1.2, 0.4), V, E, tol).verdict is Verdict.SATISFIED
    fold = Affine(((1.0, 0.0), (0.0, 0.0)))
    assert exclusive_in(fold, V, E, tol).verdict is Verdict.VIOLATED


def test_region_samples_in_a_disc(unit_circle):
    pts = region_samples(unit_circle, 0.1)
    assert len(pts) > 250
    assert np.all(np.hypot(*pts.T) <= 1.0)
    with pytest.raises(InputError):
        region_samples(Polyline(((0.0, 0.0), (1.0, 1.0))), 0.1)


def test_injectivity_margin():
    samples = disc_samples((0.0, 0.0), 1.0, 0.1)
    assert injectivity_margin(rotation(0.3), samples, eps=0.1).margin == pytest.approx(0.1, rel=1e-6)
    fold = Affine(((1.0, 0.0), (0.0, 0.0)))
    collapsed = injectivity_margin(fold, samples, eps=0.1)
    assert not collapsed.injective
    (a, b) = collapsed.witness
    assert a[0] == pytest.approx(b[0])


@pytest.mark.parametrize(
    "f, expected",
    [
        (IDENTITY, Orientation.PRESERVING),
        (rotation(2.0), Orientation.PRESERVING),
        (Affine(((1.0, 0.0), (0.0, -1.0))), Orientation.REVERSING),
        (Affine(((1.0, 0.0), (0.0, 0.0))), Orientation.UNDECIDED),
    ],
)
def test_local_orientation(f, expected):
    assert local_orientation(f, (0.3, 0.3), 0.25) is expected


def test_circle_image_under_a_reflection_reverses():
    reflect = Affine(((-1.0, 0.0), (0.0, 1.0)))
    img = image_polyline(reflect, circle_polyline((0.0, 0.0), 1.0, 16), 0.5).polyline
    assert img.closed and len(img) == 16
    assert signed_area(img.array) < 0
