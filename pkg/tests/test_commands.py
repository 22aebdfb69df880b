import importlib
import json
import math
import shutil
import sys

import pytest

import planefix.modules
from planefix.__main__ import build_parser, main
from planefix.modules.commands import run
from planefix.modules.scenario import builtin_scenario, load_scenario, parse_scenario
from planefix.utils import Status


def copy_scenario(scenarios_dir, tmp_path, name: str):
    target = tmp_path / name
    shutil.copy(scenarios_dir / name, target)
    return target


# ============ PIPELINES ============
def test_fold_example_has_a_period_but_no_fixed_point():
    report = run(builtin_scenario("1_2", n=3))
    assert report.status is Status.COMPLETE
    assert report.certificates == []
    values = report.artifacts["values"]
    assert values["period(x)"] == 3
    assert math.sqrt(0.1) - 1e-9 <= values["grid_min_displacement"] <= math.sqrt(0.1) + 0.1
    assert any("degree-cancelling" in note for note in report.notes)


@pytest.mark.slow
def test_spiral_example_certifies_the_origin(example_4_5_run):
    _, report = example_4_5_run
    assert report.status is Status.COMPLETE
    (cert,) = report.certificates
    assert math.dist(cert.approx, (0.0, 0.0)) <= 1e-8
    names = [name for name, _ in report.clauses]
    assert names[0] == "step_arc"
    assert names[-4:] == ["containment", "orientation", "injectivity", "exclusivity"]


@pytest.mark.slow
def test_half_turn_construction_certifies_the_origin(scenarios_dir):
    report = run(load_scenario(str(scenarios_dir / "rotation_pi.scn")))
    assert report.status is Status.COMPLETE
    assert report.artifacts["values"]["case"] == "ONE_STEP"
    assert any(math.dist(c.approx, (0.0, 0.0)) <= 1e-8 for c in report.certificates)


@pytest.mark.slow
def test_third_turn_construction_certifies_the_origin():
    scn = parse_scenario(
        "[scenario]\ntask = CERTIFY\n\n[map]\nkind = COMPLEX_SCALE_ROT\nangle = 2.0943951023931953\n\n"
        "[outflank]\nstart = 1 0\nperiod = 3\n"
    )
    report = run(scn)
    assert report.status is Status.COMPLETE
    assert report.artifacts["values"]["case"] == "ITERATED"
    assert any(math.dist(c.approx, (0.0, 0.0)) <= 1e-9 for c in report.certificates)


def test_domain_errors_name_their_module():
    scn = parse_scenario(
        "[scenario]\ntask = CERTIFY\n\n[map]\nkind = TRANSLATE\nvector = 1 0\ndomain = 0 0 1 1\n\n"
        "[region]\nbox = 0 0 3 1\n"
    )
    report = run(scn)
    assert report.status is Status.ERROR
    assert report.notes[-1].startswith("maps:")


# ============ COMMAND LINE ============
def test_parser_lists_every_command():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert sorted(sub.choices) == ["angles", "certify", "check-qivt", "example", "outflank", "render"]


def test_unknown_command_is_an_input_error():
    with pytest.raises(SystemExit) as info:
        main(["triangulate", "x.scn"])
    assert info.value.code == 4


def test_angles_command_writes_a_json_report(scenarios_dir, tmp_path, capsys):
    out = tmp_path / "angles.json"
    code = main(["angles", str(scenarios_dir / "unit_circle_angles.scn"), "--json-report", str(out)])
    assert code == 0
    assert "ANGLES: COMPLETE" in capsys.readouterr().out
    values = json.loads(out.read_text(encoding="utf-8"))["artifacts"]["values"]
    assert values["w"] == 1
    assert values["side"] == "RIGHT"
    assert values["quarter"] == pytest.approx(math.pi / 2)


def test_undefined_angle_is_an_input_error(tmp_path):
    path = tmp_path / "on_curve.scn"
    path.write_text(
        "[scenario]\ntask = ANGLES\n\n[curve C]\nclosed = true\ncircle = 0 0 1 64\n\n"
        "[angle w]\nkind = WINDING\ncurve = C\nat = 1 0\n",
        encoding="utf-8",
    )
    assert main(["angles", str(path)]) == 4


def test_missing_file_is_an_input_error(tmp_path, capsys):
    assert main(["certify", str(tmp_path / "absent.scn")]) == 4
    assert capsys.readouterr().out.startswith("error:")


def test_check_qivt_exit_code(scenarios_dir):
    assert main(["check-qivt", str(scenarios_dir / "qivt_cond1.scn")]) == 0


def test_example_command_with_parameters(tmp_path):
    out = tmp_path / "fold.svg"
    assert main(["example", "1_2", "n=3", "-o", str(out)]) == 0
    assert out.read_text(encoding="utf-8").startswith("<?xml")
    assert main(["example", "1_2", "n3"]) == 4


def test_render_defaults_to_an_svg_next_to_the_scenario(scenarios_dir, tmp_path):
    path = copy_scenario(scenarios_dir, tmp_path, "unit_circle_angles.scn")
    assert main(["render", str(path)]) == 0
    assert (tmp_path / "unit_circle_angles.svg").exists()
    png = tmp_path / "preview.png"
    assert main(["render", str(path), "-o", str(png)]) == 0
    assert png.stat().st_size > 0


def test_tolerance_flags_override_the_scenario(scenarios_dir, tmp_path):
    out = tmp_path / "report.json"
    main(["angles", str(scenarios_dir / "unit_circle_angles.scn"), "--eps-sep", "0.02", "--json-report", str(out)])
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["tolerances"]["eps_sep"] == 0.02


def test_old_interpreters_are_turned_away(monkeypatch):
    monkeypatch.setattr(sys, "version_info", (3, 9, 18))
    with pytest.raises(SystemExit) as info:
        importlib.reload(planefix.modules)
    assert info.value.code == 4
