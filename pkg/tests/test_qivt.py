import math

import numpy as np
import pytest

from planefix.__main__ import main
from planefix.modules.fixpoint import grid_oracle
from planefix.modules.geom import Box, Polyline
from planefix.modules.maps import Translate
from planefix.modules.qivt import QivtInstance, certify_qivt, check_condition, derive, select_W
from planefix.modules.scenario import load_scenario
from planefix.utils import HypothesisViolation, InputError, Status, Verdict

SQUARE = Polyline(((0.0, 0.0), (8.0, 0.0), (8.0, 4.0), (0.0, 4.0)), closed=True)
BOTTOM = Polyline(((1.0, 0.0), (7.0, 0.0)))

MUTANTS = {
    "qivt_cond1.scn": ("0.75", "0.8333333333333334"),
    "qivt_cond2.scn": ("0.08333333333333333", "0.25"),
}


def instance(scenarios_dir, name: str, **changes) -> QivtInstance:
    scn = load_scenario(str(scenarios_dir / name))
    q = scn.qivt
    fields = dict(f=scn.map, X=scn.curves[q.disc], A=scn.arcs[q.arc].polyline, x=q.x, y=q.y, tol=scn.tolerances)
    fields.update(changes)
    return QivtInstance(**fields)


@pytest.fixture(scope="module")
def cond1(scenarios_dir):
    inst = instance(scenarios_dir, "qivt_cond1.scn")
    return inst, certify_qivt(inst)


@pytest.fixture(scope="module")
def cond2(scenarios_dir):
    inst = instance(scenarios_dir, "qivt_cond2.scn")
    return inst, certify_qivt(inst)


# ============ INSTANCES ============
@pytest.mark.parametrize(
    "X, A, x, y",
    [
        (Polyline(((0.0, 0.0), (8.0, 0.0), (8.0, 4.0))), BOTTOM, 0.2, 0.8),
        (SQUARE, Polyline(((1.0, 0.0), (7.0, 0.0), (7.0, 1.0)), closed=True), 0.2, 0.8),
        (SQUARE, BOTTOM, 0.8, 0.2),
        (SQUARE, BOTTOM, 0.5, 0.5),
        (SQUARE, Polyline(((1.0, 1.0), (7.0, 1.0))), 0.2, 0.8),
    ],
)
def test_instance_validation(X, A, x, y):
    with pytest.raises(InputError):
        QivtInstance(Translate((0.0, 0.0)), X, A, x, y)


def test_derived_points_for_condition_one(scenarios_dir):
    d = derive(instance(scenarios_dir, "qivt_cond1.scn"))
    assert np.allclose(d.u, (4.5, 0.0))
    assert np.allclose(d.v, (3.5, 0.0))
    assert d.lam_u == pytest.approx(7.0 / 12.0)
    assert d.lam_v == pytest.approx(5.0 / 12.0)
    assert d.sign.verdict is Verdict.SATISFIED
    assert d.uv_arc is not None
    assert d.decomposition.bounded_faces()
    with pytest.raises(InputError):
        check_condition(d, 6)
    with pytest.raises(InputError):
        select_W(d, [0.9])


def test_sign_clause_raises_on_the_mutant(scenarios_dir):
    x, y = MUTANTS["qivt_cond1.scn"]
    with pytest.raises(HypothesisViolation) as info:
        derive(instance(scenarios_dir, "qivt_cond1.scn", x=float(x), y=float(y)))
    assert info.value.clause == "sign"
    assert info.value.state.verdict is Verdict.VIOLATED


# ============ CERTIFICATION ============
def test_condition_one_certifies_the_fixed_point(cond1):
    _, report = cond1
    assert report.status is Status.COMPLETE
    assert report.condition == 1
    assert all(state.ok for name, state in report.all_states() if not name.startswith("condition"))
    assert report.W is not None
    assert math.dist(report.certificate.approx, (4.0, 0.2)) <= 1e-8


def test_condition_two_certifies_the_fixed_point(cond2):
    inst, report = cond2
    assert report.status is Status.COMPLETE
    assert report.condition == 2
    assert report.conditions[1].verdict is Verdict.NOT_APPLICABLE
    approx = report.certificate.approx
    best, where = grid_oracle(inst.f, Box(approx[0] - 0.005, approx[1] - 0.005, approx[0] + 0.005, approx[1] + 0.005),
                              2e-5)
    assert best <= 1e-4
    assert math.dist(where, approx) <= 1e-4


def test_certificate_lies_in_the_receiving_face(cond1):
    _, report = cond1
    d = report.derived
    x, y = report.certificate.approx
    face = d.decomposition.faces[report.W]
    assert face.bounded
    assert d.decomposition.face_bbox(report.W).contains((x, y))


def test_clauses_are_reported_in_order(cond1):
    _, report = cond1
    names = [name for name, _ in report.all_states()]
    assert names[:5] == ["sign", "containment", "disjointness", "preimage", "uq"]
    assert names[5:] == [f"condition_{k}" for k in range(1, 6)]


@pytest.mark.parametrize("name", sorted(MUTANTS))
def test_sign_mutants_exit_violated(scenarios_dir, tmp_path, name):
    x, y = MUTANTS[name]
    text = (scenarios_dir / name).read_text(encoding="utf-8")
    text = text.replace("x = 0.3333333333333333", f"x = {x}").replace("y = 0.6666666666666666", f"y = {y}")
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    assert main(["check-qivt", str(path)]) == 2
