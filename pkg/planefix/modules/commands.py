"""
Commands Module
Runs a scenario through its pipeline and registers the command-line
handlers: check-qivt, outflank, certify, angles, render and example.
"""

from __future__ import annotations

import os
import time
import traceback
from typing import Any, Callable, Dict, List, Optional

from planefix import LOGGER, CommandHandler, application
from planefix.modules.angles import (
    DirectedCircle,
    directed_angle,
    orientation_of_embedding,
    rotational_angle,
    side_of_directed_circle,
    winding_number,
)
from planefix.modules.fixpoint import grid_oracle, locate
from planefix.modules.geom import Box, Polyline, Tolerances
from planefix.modules.maps import image_polyline, orbit
from planefix.modules.outflank import (
    OutflankCertificate,
    StepArc,
    certify_outflank,
    construct_from_periodic_orbit,
    find_outflanking_point,
    reduce_outflanked_origin,
    validate_step_arc,
)
from planefix.modules.qivt import QivtInstance, certify_qivt
from planefix.modules.render import render_png, render_svg
from planefix.modules.report import Report
from planefix.modules.scenario import Scenario, Task, builtin_scenario, load_scenario
from planefix.utils import (
    DegenerateAngleError,
    ExitCode,
    HypothesisViolation,
    InputError,
    PlanefixError,
    RefinementError,
    ResolutionError,
    Status,
    TriState,
    UndefinedAngleError,
    Verdict,
    WindingResidualError,
)

MAX_NOTED_DIAGNOSTICS = 8


def _provenance(e: BaseException) -> str:
    """Module of the innermost planefix frame that raised e."""
    frames = [fr for fr in traceback.extract_tb(e.__traceback__) if f"{os.sep}planefix{os.sep}" in fr.filename]
    if not frames:
        return "planefix"
    return os.path.splitext(os.path.basename(frames[-1].filename))[0]


def _region_box(scn: Scenario) -> Box:
    region = scn.region_shape()
    if isinstance(region, Box):
        return region
    if isinstance(region, Polyline):
        return region.bbox
    if scn.map is not None and scn.map.domain.is_bounded:
        return scn.map.domain
    raise InputError("this task needs a [region] (or a map with a bounded domain)")


def _need_map(scn: Scenario):
    if scn.map is None:
        raise InputError(f"{scn.task.value} needs a [map]")
    return scn.map


# ============ QIVT ============
def _run_qivt(scn: Scenario, report: Report) -> None:
    if scn.qivt is None:
        raise InputError("this task needs a [qivt] section")
    q = scn.qivt
    X, A = scn.curves[q.disc], scn.curve_or_arc(q.arc)
    inst = QivtInstance(_need_map(scn), X, A, q.x, q.y, scn.tolerances)
    report.add_polyline("X", X, "domain")
    report.add_polyline("A", A, "arc")

    qr = certify_qivt(inst)
    report.add_clauses(qr.all_states())
    report.status = qr.status
    report.notes.extend(qr.notes)
    report.undecided_boxes.extend(qr.undecided_boxes)
    if qr.certificate is not None:
        report.certificates.append(qr.certificate)
    if qr.condition is not None:
        report.add_value("condition", qr.condition)
    d = qr.derived
    if d is not None:
        report.add_polyline("K", d.K, "image")
        if d.uv_arc is not None:
            report.add_polyline("uv", d.uv_arc, "boundary")
        report.add_point("u", d.u)
        report.add_point("v", d.v)
        if qr.W is not None:
            report.add_face("W", d.decomposition.face_runs(qr.W))


# ============ OUTFLANKING ============
def _step_arc(scn: Scenario) -> StepArc:
    if scn.outflank is None or scn.outflank.arc is None:
        raise InputError("this task needs an [outflank] section naming an arc")
    spec = scn.arcs[scn.outflank.arc]
    return StepArc(spec.polyline, spec.params, _need_map(scn))


def _add_step_arc(report: Report, sa: StepArc, tol: Tolerances) -> None:
    report.add_polyline("A", sa.A, "arc")
    report.add_polyline("f(A)", image_polyline(sa.f, sa.A, tol.eps_sep / 4.0).polyline, "image")
    for k in range(sa.n + 1):
        report.add_point(f"u{k}", sa.u(k))


def _add_outflanking(report: Report, cert: OutflankCertificate) -> None:
    report.add_clauses(cert.states())
    report.add_point("y", cert.y_point)
    report.add_point("v", cert.v)
    report.add_value("outflanking", cert.to_dict())
    reduced = reduce_outflanked_origin(cert)
    if reduced.n != cert.n:
        report.add_value("reduced_steps", reduced.n)


def _search(scn: Scenario, report: Report) -> Optional[OutflankCertificate]:
    """Validate the step arc and look for its outflanking point."""
    tol = scn.tolerances
    sa = _step_arc(scn)
    state = validate_step_arc(sa.A, sa.f, sa.params, tol)
    report.add_clause("step_arc", state)
    _add_step_arc(report, sa, tol)
    if state.verdict is Verdict.VIOLATED:
        report.status = Status.VIOLATED
        return None
    if not state.ok:
        report.status = Status.UNDECIDED
        return None
    search = find_outflanking_point(sa, tol)
    report.notes.extend(search.diagnostics[:MAX_NOTED_DIAGNOSTICS])
    if not search.found:
        report.notes.append("no outflanking point on the last step")
        return None
    _add_outflanking(report, search.certificate)
    return search.certificate


def _construct(scn: Scenario, report: Report) -> Optional[OutflankCertificate]:
    o = scn.outflank
    if o is None or o.start is None:
        raise InputError("construction needs an [outflank] section with start and period")
    tol = scn.tolerances
    built = construct_from_periodic_orbit(_need_map(scn), o.start, o.period, tol)
    report.notes.extend(built.diagnostics[:MAX_NOTED_DIAGNOSTICS])
    if built.contact is not None:
        report.add_value("contact", built.contact)
        report.add_point("w", built.w)
        report.add_point("w'", built.w_prime)
    if not built.ok:
        if built.failure.startswith("precondition"):
            report.add_clause("construction", TriState.violated(note=built.failure))
            report.status = Status.VIOLATED
        else:
            report.add_clause("construction", TriState.undecided(tol.eps_sep, note=built.failure))
            report.status = Status.UNDECIDED
        return None
    report.add_clause("construction", TriState.satisfied(tol.eps_sep, note=f"{built.case} outflanking arc"))
    report.add_value("case", built.case)
    _add_step_arc(report, built.step_arc, tol)
    _add_outflanking(report, built.certificate)
    return built.certificate


def _certify_outflanking(scn: Scenario, report: Report, cert: OutflankCertificate) -> None:
    region = scn.region_shape()
    out = certify_outflank(cert, region, scn.tolerances)
    report.add_clauses(out.all_states())
    report.status = out.status
    report.notes.extend(out.notes)
    report.undecided_boxes.extend(out.undecided_boxes)
    if region is None and out.E is not None:
        report.add_polyline("E", out.E, "domain")
    if out.K is not None:
        report.add_polyline("K", out.K, "image")
    if out.P is not None:
        report.add_polyline("P", out.P, "boundary")
    if out.face_runs:
        report.add_face("W", out.face_runs)
    if out.certificate is not None:
        report.certificates.append(out.certificate)


def _run_outflank_validate(scn: Scenario, report: Report) -> None:
    _search(scn, report)


def _run_outflank_construct(scn: Scenario, report: Report) -> None:
    _construct(scn, report)


# ============ CERTIFY ============
def _run_certify(scn: Scenario, report: Report) -> None:
    if scn.qivt is not None:
        _run_qivt(scn, report)
        return
    if scn.outflank is not None:
        cert = _search(scn, report) if scn.outflank.arc is not None else _construct(scn, report)
        if cert is not None:
            _certify_outflanking(scn, report, cert)
        elif report.status is Status.COMPLETE:
            report.status = Status.UNDECIDED
        return
    _run_locate(scn, report)


def _run_locate(scn: Scenario, report: Report) -> None:
    f = _need_map(scn)
    box = _region_box(scn)
    found = locate(f, box, scn.tolerances)
    report.certificates.extend(found.certificates)
    report.undecided_boxes.extend(found.undecided)
    report.status = Status.COMPLETE if found.complete else Status.UNDECIDED
    best, where = grid_oracle(f, box, scn.tolerances.grid_pitch)
    report.add_value("grid_min_displacement", best)
    report.add_point("grid_argmin", where)
    for name, p in sorted(scn.points.items()):
        path = orbit(f, p, 8)
        back = next((k for k in range(1, len(path)) if path.points[k] == path.points[0]), None)
        if back is not None:
            report.add_value(f"period({name})", back)
            report.add_polyline(f"orbit({name})", Polyline(path.points[:back + 1]), "curve")
    if not found.certificates:
        report.notes.append("no box of nonzero degree; degree-cancelling pairs are not excluded")


# ============ ANGLES ============
def _angle_value(scn: Scenario, kind: str, query) -> Any:
    if kind == "DIRECTED":
        v, x, y = query.points
        return directed_angle(v, x, y)
    curve = scn.curve_or_arc(query.curve)
    if kind == "ROTATIONAL":
        return rotational_angle(curve, query.at)
    if kind == "WINDING":
        return winding_number(DirectedCircle(curve), query.at)
    if kind == "SIDE":
        return side_of_directed_circle(DirectedCircle(curve), query.at).value
    image = Polyline.from_array(_need_map(scn).evaluate_many(curve.array), closed=True)
    return orientation_of_embedding(DirectedCircle(curve), DirectedCircle(image)).value


def _run_angles(scn: Scenario, report: Report) -> None:
    failed = 0
    for query in scn.angles:
        try:
            value = _angle_value(scn, query.kind, query)
        except (UndefinedAngleError, DegenerateAngleError, WindingResidualError) as e:
            LOGGER.warning(f"⚠️ angle '{query.name}': {e}")
            value = f"UNDEFINED: {e}"
            failed += 1
        report.add_value(query.name, value)
        if query.at is not None:
            report.add_point(query.name, query.at)
    if failed:
        report.status = Status.ERROR
        report.notes.append(f"{failed} angle quer{'y' if failed == 1 else 'ies'} undefined")


# ============ RENDER ============
def _run_render(scn: Scenario, report: Report) -> None:
    f = scn.map
    for name, spec in sorted(scn.arcs.items()):
        report.add_polyline(name, spec.polyline, "arc")
        if f is not None:
            report.add_polyline(f"f({name})", image_polyline(f, spec.polyline, scn.tolerances.eps_sep / 4.0).polyline,
                                "image")
    for name, p in sorted(scn.points.items()):
        report.add_point(name, p)


RUNNERS: Dict[Task, Callable[[Scenario, Report], None]] = {
    Task.CHECK_QIVT: _run_qivt,
    Task.OUTFLANK_VALIDATE: _run_outflank_validate,
    Task.OUTFLANK_CONSTRUCT: _run_outflank_construct,
    Task.CERTIFY: _run_certify,
    Task.ANGLES: _run_angles,
    Task.RENDER: _run_render,
}


def run(scenario: Scenario) -> Report:
    """Dispatch the scenario's task and collect the report."""
    report = Report(task=scenario.task.value, tolerances=scenario.tolerances.to_dict())
    started = time.perf_counter()
    LOGGER.info(f"🔄 Running {scenario.task.value} on '{scenario.name}'")
    try:
        RUNNERS[scenario.task](scenario, report)
    except HypothesisViolation as e:
        report.add_clause(e.clause, e.state)
        report.status = Status.VIOLATED
    except (RefinementError, ResolutionError) as e:
        LOGGER.error(f"❌ {_provenance(e)}: {e}")
        report.status = Status.UNDECIDED
        report.notes.append(f"{_provenance(e)}: {type(e).__name__}: {e}")
    except PlanefixError as e:
        LOGGER.error(f"❌ {_provenance(e)}: {e}")
        report.status = Status.ERROR
        report.notes.append(f"{_provenance(e)}: {type(e).__name__}: {e}")
    report.timing["seconds"] = time.perf_counter() - started
    if report.status is Status.INCONSISTENT:
        LOGGER.error(f"❌ INCONSISTENT result for '{scenario.name}'")
    else:
        LOGGER.info(f"{'✅' if report.status is Status.COMPLETE else '⚠️'} {scenario.task.value}: {report.status.value}")
    return report


# ============ COMMAND HANDLERS ============
def _tolerance_overrides(args: Any) -> Dict[str, Any]:
    pairs = {
        "eps_sep": getattr(args, "eps_sep", None),
        "tol_fix": getattr(args, "tol_fix", None),
        "grid_pitch": getattr(args, "grid_pitch", None),
        "jitter_seed": getattr(args, "seed_jitter", None),
    }
    return {k: v for k, v in pairs.items() if v is not None}


def _prepare(scn: Scenario, args: Any, task: Optional[Task] = None) -> Scenario:
    overrides = _tolerance_overrides(args)
    if overrides:
        scn.tolerances = scn.tolerances.with_(**overrides)
    if task is not None:
        scn.task = task
    return scn


def _emit(report: Report, args: Any) -> int:
    print(report.to_text(), end="")
    path = getattr(args, "json_report", None)
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report.to_json())
            LOGGER.info(f"✅ JSON report written to {path}")
        except OSError as e:
            LOGGER.error(f"❌ cannot write {path}: {e}")
            return int(ExitCode.INPUT_ERROR)
    return report.exit_code


def _guarded(body: Callable[[Any], int]) -> Callable[[Any], int]:
    def callback(args: Any) -> int:
        try:
            return body(args)
        except InputError as e:
            LOGGER.error(f"❌ {e}")
            print(f"error: {e}")
            return int(ExitCode.INPUT_ERROR)
    callback.__name__ = body.__name__
    callback.__doc__ = body.__doc__
    return callback


def _file_command(task: Optional[Task]) -> Callable[[Any], int]:
    def body(args: Any) -> int:
        scn = _prepare(load_scenario(args.file), args, task)
        return _emit(run(scn), args)
    return _guarded(body)


@_guarded
def outflank_command(args: Any) -> int:
    scn = load_scenario(args.file)
    construct = scn.outflank is not None and scn.outflank.start is not None
    scn = _prepare(scn, args, Task.OUTFLANK_CONSTRUCT if construct else Task.OUTFLANK_VALIDATE)
    return _emit(run(scn), args)


@_guarded
def render_command(args: Any) -> int:
    scn = _prepare(load_scenario(args.file), args)
    report = run(scn)
    output = getattr(args, "output", None) or os.path.splitext(args.file)[0] + ".svg"
    try:
        if output.lower().endswith(".png"):
            render_png(scn, report).save(output)
        else:
            with open(output, "w", encoding="utf-8") as fh:
                fh.write(render_svg(scn, report))
    except OSError as e:
        raise InputError(f"cannot write {output}: {e}") from None
    LOGGER.info(f"✅ Drawing written to {output}")
    return _emit(report, args)


def _example_params(pairs: List[str]) -> Dict[str, str]:
    params = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise InputError(f"example parameters take key=value, got '{pair}'")
        params[key.strip()] = value.strip()
    return params


@_guarded
def example_command(args: Any) -> int:
    scn = _prepare(builtin_scenario(args.example, **_example_params(args.params or [])), args)
    report = run(scn)
    output = getattr(args, "output", None)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(render_svg(scn, report))
    return _emit(report, args)


application.add_handler(CommandHandler("check-qivt", _file_command(Task.CHECK_QIVT),
                                       "check the QIVT hypotheses and certify the fixed point in W"))
application.add_handler(CommandHandler("outflank", outflank_command,
                                       "validate a step arc or build one from a periodic orbit"))
application.add_handler(CommandHandler("certify", _file_command(Task.CERTIFY),
                                       "run the full pipeline and certify fixed points"))
application.add_handler(CommandHandler("angles", _file_command(Task.ANGLES),
                                       "evaluate directed, rotational, winding, side and orientation queries"))
application.add_handler(CommandHandler("render", render_command, "run the scenario and draw it (-o out.svg)"))
application.add_handler(CommandHandler("example", example_command,
                                       "run a builtin example: 1_2 or 4_5 with key=value parameters",
                                       takes_file=False))
