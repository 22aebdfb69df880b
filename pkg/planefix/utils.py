from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

PointTuple = Tuple[float, float]


# ============ EXIT CODES ============
class ExitCode(IntEnum):
    OK = 0
    VIOLATED = 2
    UNDECIDED = 3
    INPUT_ERROR = 4
    INCONSISTENT = 5


class Status(str, Enum):
    COMPLETE = "COMPLETE"
    VIOLATED = "VIOLATED"
    UNDECIDED = "UNDECIDED"
    ERROR = "ERROR"
    INCONSISTENT = "INCONSISTENT"

    @property
    def exit_code(self) -> ExitCode:
        return STATUS_EXIT_CODES[self]


STATUS_EXIT_CODES = {
    Status.COMPLETE: ExitCode.OK,
    Status.VIOLATED: ExitCode.VIOLATED,
    Status.UNDECIDED: ExitCode.UNDECIDED,
    Status.ERROR: ExitCode.INPUT_ERROR,
    Status.INCONSISTENT: ExitCode.INCONSISTENT,
}


# ============ ERRORS ============
class PlanefixError(Exception):
    """Base class for every planefix failure."""


class InputError(PlanefixError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ScenarioError(InputError):
    pass


class DomainError(PlanefixError):
    pass


class DegenerateAngleError(PlanefixError):
    pass


class UndefinedAngleError(PlanefixError):
    pass


class WindingResidualError(PlanefixError):
    pass


class ResolutionError(PlanefixError):
    pass


class RefinementError(PlanefixError):
    pass


class HypothesisViolation(PlanefixError):
    def __init__(self, clause: str, state: "TriState"):
        self.clause = clause
        self.state = state
        super().__init__(f"{clause}: {state.verdict.value} {state.note}".strip())


# ============ VERDICTS ============
class Verdict(str, Enum):
    SATISFIED = "SATISFIED"
    VIOLATED = "VIOLATED"
    UNDECIDED = "UNDECIDED"
    NOT_APPLICABLE = "NOT_APPLICABLE"


def as_point(p: Any) -> PointTuple:
    return (float(p[0]), float(p[1]))


@dataclass(frozen=True)
class TriState:
    """Honest outcome of a sampled predicate."""
    verdict: Verdict
    margin: Optional[float] = None
    witness: Optional[Tuple[PointTuple, ...]] = None
    resolution: Optional[float] = None
    note: str = ""

    @classmethod
    def satisfied(cls, margin: float, note: str = "", resolution: Optional[float] = None) -> "TriState":
        return cls(Verdict.SATISFIED, margin=float(margin), resolution=resolution, note=note)

    @classmethod
    def violated(cls, *witness: Any, note: str = "") -> "TriState":
        return cls(Verdict.VIOLATED, witness=tuple(as_point(w) for w in witness), note=note)

    @classmethod
    def undecided(cls, resolution: float, note: str = "") -> "TriState":
        return cls(Verdict.UNDECIDED, resolution=float(resolution), note=note)

    @classmethod
    def not_applicable(cls, note: str = "") -> "TriState":
        return cls(Verdict.NOT_APPLICABLE, note=note)

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.SATISFIED

    @staticmethod
    def combine(states: Iterable["TriState"], note: str = "") -> "TriState":
        """First VIOLATED wins, then UNDECIDED; otherwise SATISFIED with the smallest margin."""
        states = list(states)
        for s in states:
            if s.verdict is Verdict.VIOLATED:
                return s
        for s in states:
            if s.verdict is Verdict.UNDECIDED:
                return s
        for s in states:
            if s.verdict is Verdict.NOT_APPLICABLE:
                return s
        if not states:
            return TriState.not_applicable(note or "no clauses")
        margin = min(s.margin for s in states)
        return TriState.satisfied(margin, note=note)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "margin": self.margin,
            "witness": [list(w) for w in self.witness] if self.witness is not None else None,
            "resolution": self.resolution,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TriState":
        witness = data.get("witness")
        return cls(
            Verdict(data["verdict"]),
            margin=data.get("margin"),
            witness=tuple(as_point(w) for w in witness) if witness is not None else None,
            resolution=data.get("resolution"),
            note=data.get("note", ""),
        )


def status_of(states: Sequence[TriState]) -> Status:
    if any(s.verdict is Verdict.VIOLATED for s in states):
        return Status.VIOLATED
    if any(s.verdict is Verdict.UNDECIDED for s in states):
        return Status.UNDECIDED
    return Status.COMPLETE


# ============ NUMBER FORMATTING ============
def fmt(value: Optional[float], digits: int = 6) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}g}"


def fmt_point(p: Optional[Sequence[float]], digits: int = 6) -> str:
    if p is None:
        return "-"
    return f"({fmt(p[0], digits)}, {fmt(p[1], digits)})"


# ============ TIME FORMATTING ============
def format_time(seconds: float) -> str:
    """Format a duration for reports."""
    if seconds <= 0:
        return "0ms"
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes, secs = divmod(seconds, 60)
    return f"{int(minutes)}m{secs:.0f}s"
