import dataclasses
import math

import numpy as np
import pytest

from planefix.modules.geom import Polyline, Tolerances
from planefix.modules.maps import Affine, ComplexScaleRot, Translate, conjugate
from planefix.modules.outflank import (
    StepArc,
    certify_outflank,
    construct_from_periodic_orbit,
    detect_outflanking,
    find_outflanking_point,
    normalizing_similarity,
    reduce_outflanked_origin,
    validate_step_arc,
)
from planefix.utils import InputError, Status, Verdict

DIP_VERTEX = 2 * 192 + 128


def spiral_step_arc(spiral) -> StepArc:
    return StepArc(spiral.arc, spiral.orbit_params, spiral.f)


def near_similarity(seed: int) -> Affine:
    """s R(theta) (I + S) with a small shear S, condition number well below 1.26."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.9, 1.1)
    th = rng.uniform(0.0, 2.0 * math.pi)
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    S = np.eye(2) + rng.uniform(-0.05, 0.05, size=(2, 2))
    M = s * R @ S
    return Affine(tuple(map(tuple, M)), tuple(rng.uniform(-3, 3, size=2)))


def conjugated_step_arc(spiral, h: Affine) -> StepArc:
    A = spiral.arc.transformed(h.evaluate_many)
    params = tuple(float(A.params[k * 192]) for k in range(4))
    return StepArc(A, params, conjugate(spiral.f, h))


def similarity(scale: float, angle: float, offset) -> Affine:
    c, s = scale * math.cos(angle), scale * math.sin(angle)
    return Affine(((c, -s), (s, c)), offset)


def hausdorff(P: Polyline, Q: Polyline, step: float = 0.005) -> float:
    return max(Q.distance_many(P.densify(step)[0]).max(), P.distance_many(Q.densify(step)[0]).max())


# ============ STEP ARCS ============
def test_step_arc_needs_an_open_arc_and_two_params(unit_circle):
    with pytest.raises(InputError):
        StepArc(unit_circle, (0.0, 1.0), Translate((1.0, 0.0)))
    with pytest.raises(InputError):
        StepArc(Polyline(((0.0, 0.0), (1.0, 0.0))), (0.0,), Translate((1.0, 0.0)))


def test_spiral_step_arc_is_valid(spiral, tolerances):
    state = validate_step_arc(spiral.arc, spiral.f, spiral.orbit_params, tolerances)
    assert state.verdict is Verdict.SATISFIED
    assert state.margin >= tolerances.eps_sep - 1e-6


def test_step_arc_violations(spiral, tolerances):
    ts = list(spiral.orbit_params)
    swapped = [ts[0], ts[2], ts[1], ts[3]]
    assert validate_step_arc(spiral.arc, spiral.f, swapped, tolerances).verdict is Verdict.VIOLATED
    shifted = [ts[0], ts[1], ts[2], 0.999]
    assert validate_step_arc(spiral.arc, spiral.f, shifted, tolerances).verdict is Verdict.VIOLATED
    other = ComplexScaleRot(spiral.f.lam, 1.8)
    off = validate_step_arc(spiral.arc, other, ts, tolerances)
    assert off.verdict is Verdict.VIOLATED
    assert "u_1" in off.note


def test_one_step_arc_is_valid_when_it_ends_at_the_image(tolerances):
    A = Polyline(((0.0, 0.0), (0.5, 0.5), (1.0, 0.0)))
    state = validate_step_arc(A, Translate((1.0, 0.0)), (0.0, 1.0), tolerances)
    assert state.verdict is Verdict.SATISFIED


# ============ OUTFLANKING POINT ============
def test_spiral_outflanks_at_the_dip(spiral, tolerances):
    search = find_outflanking_point(spiral_step_arc(spiral), tolerances)
    assert search.found
    cert = search.certificate
    assert cert.y == pytest.approx(spiral.y_param, abs=1e-9)
    assert cert.contact <= 1e-9
    assert cert.v_param == pytest.approx(0.0, abs=1e-9)
    assert all(state.ok for _, state in cert.states())
    assert cert.to_dict()["n"] == 3


@pytest.mark.slow
def test_certificate_holds_on_a_finer_sampling(spiral, tolerances):
    cert = find_outflanking_point(spiral_step_arc(spiral), tolerances).certificate
    finer = cert.revalidate(tolerances)
    assert [name for name, _ in finer] == [name for name, _ in cert.states()]
    assert all(state.verdict is Verdict.SATISFIED for _, state in finer)


def test_reducing_the_origin(spiral, tolerances):
    cert = find_outflanking_point(spiral_step_arc(spiral), tolerances).certificate
    assert reduce_outflanked_origin(cert) is cert

    ts = spiral.orbit_params
    v_param = 0.5 * (ts[1] + ts[2])
    moved = dataclasses.replace(cert, v_param=v_param, v=tuple(spiral.arc.point_at(v_param)))
    reduced = reduce_outflanked_origin(moved)
    assert reduced.n == 2
    assert reduced.base.params[0] == 0.0 and reduced.base.params[-1] == 1.0
    assert np.allclose(reduced.base.A.start, spiral.arc.point_at(ts[1]))
    assert np.allclose(reduced.y_point, cert.y_point)
    assert reduce_outflanked_origin(reduced) is reduced


def test_detect_outflanking(spiral, tolerances):
    assert detect_outflanking(spiral_step_arc(spiral), tolerances) is not None
    sa = StepArc(Polyline(((0.0, 0.0), (1.0, 0.0))), (0.0, 1.0), Translate((1.0, 0.0)))
    assert detect_outflanking(sa, tolerances) is None


def test_no_outflanking_for_a_translation(tolerances):
    sa = StepArc(Polyline(((0.0, 0.0), (0.5, 0.2), (1.0, 0.0))), (0.0, 1.0), Translate((1.0, 0.0)))
    search = find_outflanking_point(sa, tolerances)
    assert not search.found
    assert search.diagnostics


@pytest.mark.parametrize("seed", range(20))
def test_outflanking_survives_conjugacy(spiral, tolerances, seed):
    h = near_similarity(seed)
    sa = conjugated_step_arc(spiral, h)
    search = find_outflanking_point(sa, tolerances)
    assert search.found
    cert = search.certificate
    assert cert.y == pytest.approx(float(sa.A.params[DIP_VERTEX]), abs=1e-9)
    assert np.allclose(cert.v, sa.A.start, atol=1e-8)


# ============ CONSTRUCTION ============
def test_normalizing_similarity():
    h = normalizing_similarity((1.0, 2.0), (3.0, 1.0))
    assert np.allclose(h((1.0, 2.0)), (0.0, 0.0))
    assert np.allclose(h((3.0, 1.0)), (1.0, 0.0))
    with pytest.raises(InputError):
        normalizing_similarity((1.0, 1.0), (1.0, 1.0))


def test_half_turn_gives_a_one_step_arc(tolerances):
    built = construct_from_periodic_orbit(ComplexScaleRot(1.0, math.pi), (1.0, 0.0), 2, tolerances)
    assert built.ok, built.failure
    assert built.case == "ONE_STEP"
    assert built.contact == pytest.approx(0.5, rel=1e-6)
    assert built.step_arc.n == 1
    assert np.allclose(built.step_arc.A.start, (1.0, 0.0))
    assert np.allclose(built.step_arc.A.end, (-1.0, 0.0))


def test_third_turn_gives_an_iterated_arc(tolerances):
    built = construct_from_periodic_orbit(ComplexScaleRot(1.0, 2.0 * math.pi / 3.0), (1.0, 0.0), 3, tolerances)
    assert built.ok, built.failure
    assert built.case == "ITERATED"
    assert built.step_arc.n == 2


@pytest.mark.parametrize(
    "f, x, m",
    [
        (ComplexScaleRot(1.0, math.pi), (1.0, 0.0), 2),
        (ComplexScaleRot(1.0, 2.0 * math.pi / 3.0), (1.0, 0.0), 3),
    ],
)
@pytest.mark.parametrize("h", [similarity(1.0, 0.7, (0.0, 0.0)), similarity(2.0, 0.0, (1.0, -2.0))])
def test_construction_follows_the_conjugacy(tolerances, f, x, m, h):
    plain = construct_from_periodic_orbit(f, x, m, tolerances)
    moved = construct_from_periodic_orbit(conjugate(f, h), h(x), m, tolerances)
    assert plain.ok and moved.ok, moved.failure
    assert moved.case == plain.case
    image = plain.step_arc.A.transformed(h.evaluate_many)
    assert hausdorff(moved.step_arc.A, image) <= tolerances.eps_sep


@pytest.mark.parametrize(
    "f, x, m",
    [
        (ComplexScaleRot(1.0, math.pi), (1.0, 0.0), 1),
        (ComplexScaleRot(1.0, math.pi), (0.0, 0.0), 2),
        (Translate((1.0, 0.0)), (0.0, 0.0), 3),
    ],
)
def test_construction_preconditions(tolerances, f, x, m):
    built = construct_from_periodic_orbit(f, x, m, tolerances)
    assert not built.ok
    assert built.failure.startswith("precondition")


# ============ CERTIFICATION ============
@pytest.mark.slow
def test_certify_the_spiral(spiral, tolerances):
    cert = find_outflanking_point(spiral_step_arc(spiral), tolerances).certificate
    report = certify_outflank(cert, spiral.region, tolerances)
    assert report.status is Status.COMPLETE
    assert report.W is not None and report.face_runs
    assert report.certificate is not None
    assert math.dist(report.certificate.approx, (0.0, 0.0)) <= 1e-8
    assert [name for name, _ in report.all_states()] == ["containment", "orientation", "injectivity", "exclusivity"]


@pytest.fixture(scope="module")
def plain_spiral_report(spiral):
    tol = Tolerances()
    cert = find_outflanking_point(spiral_step_arc(spiral), tol).certificate
    return certify_outflank(cert, None, tol)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_certified_fixed_point_follows_the_conjugacy(spiral, plain_spiral_report, seed):
    h = near_similarity(seed)
    tol = Tolerances()
    cert = find_outflanking_point(conjugated_step_arc(spiral, h), tol).certificate
    report = certify_outflank(cert, None, tol)
    assert report.status is Status.COMPLETE
    assert [s.verdict for _, s in report.all_states()] == [s.verdict for _, s in plain_spiral_report.all_states()]
    cond = np.linalg.cond(h.M)
    assert math.dist(report.certificate.approx, h((0.0, 0.0))) <= 1e-6 * cond

