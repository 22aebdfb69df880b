import math

import pytest

from planefix.utils import (
    ExitCode,
    InputError,
    Status,
    TriState,
    Verdict,
    fmt_point,
    format_time,
    status_of,
)


def test_status_exit_codes():
    assert Status.COMPLETE.exit_code == ExitCode.OK == 0
    assert Status.VIOLATED.exit_code == 2
    assert Status.UNDECIDED.exit_code == 3
    assert Status.ERROR.exit_code == 4
    assert Status.INCONSISTENT.exit_code == 5


def test_combine_prefers_violated_then_undecided():
    ok = TriState.satisfied(0.5)
    tight = TriState.satisfied(0.1)
    unsure = TriState.undecided(0.01, note="close")
    bad = TriState.violated((1, 2), note="hit")

    assert TriState.combine([ok, unsure, bad]) is bad
    assert TriState.combine([ok, unsure]) is unsure
    combined = TriState.combine([ok, tight])
    assert combined.verdict is Verdict.SATISFIED
    assert combined.margin == pytest.approx(0.1)
    assert TriState.combine([]).verdict is Verdict.NOT_APPLICABLE


def test_tristate_dict_round_trip():
    state = TriState.violated((0.25, -1.5), (3, 4), note="image meets target")
    back = TriState.from_dict(state.to_dict())
    assert back == state
    assert back.witness == ((0.25, -1.5), (3.0, 4.0))


def test_status_of():
    assert status_of([TriState.satisfied(1.0)]) is Status.COMPLETE
    assert status_of([TriState.satisfied(1.0), TriState.undecided(0.1)]) is Status.UNDECIDED
    assert status_of([TriState.undecided(0.1), TriState.violated()]) is Status.VIOLATED


def test_input_error_carries_position():
    e = InputError("bad number 'x'", line=3, column=14)
    assert e.line == 3 and e.column == 14
    assert str(e) == "line 3, column 14: bad number 'x'"
    assert str(InputError("plain")) == "plain"


def test_formatting():
    assert fmt_point((1.0, math.pi), 3) == "(1, 3.14)"
    assert fmt_point(None) == "-"
    assert format_time(0.0123) == "12ms"
    assert format_time(2.5) == "2.50s"
    assert format_time(125) == "2m5s"
