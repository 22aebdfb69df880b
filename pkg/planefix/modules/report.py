"""
Report Module
The result of one scenario run: ordered clause verdicts, certificates,
drawable artifacts, JSON and text forms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from planefix import __version__
from planefix.modules.fixpoint import FixedPointCertificate
from planefix.modules.geom import Box, Polyline
from planefix.utils import Status, TriState, as_point, fmt, fmt_point, format_time

TOOL = "planefix"
KEY_ORDER = ("tool", "version", "task", "status", "exit_code", "tolerances", "clauses", "certificates",
             "undecided_boxes", "artifacts", "notes", "timing")
ROLES = ("domain", "curve", "arc", "image", "boundary")


def _finite(value: Any) -> Any:
    """Non-finite floats become None so every emitted number is finite."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating, np.integer)):
        return _finite(value.item())
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


@dataclass
class Report:
    task: str
    status: Status = Status.COMPLETE
    tolerances: Dict[str, Any] = field(default_factory=dict)
    clauses: List[Tuple[str, TriState]] = field(default_factory=list)
    certificates: List[FixedPointCertificate] = field(default_factory=list)
    undecided_boxes: List[Box] = field(default_factory=list)
    artifacts: Dict[str, Dict[str, Any]] = field(
        default_factory=lambda: {"polylines": {}, "points": {}, "faces": {}, "values": {}}
    )
    notes: List[str] = field(default_factory=list)
    timing: Dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def exit_code(self) -> int:
        return int(self.status.exit_code)

    # ============ ARTIFACTS ============
    def add_clause(self, name: str, state: TriState) -> None:
        self.clauses.append((name, state))

    def add_clauses(self, states: Sequence[Tuple[str, TriState]], prefix: str = "") -> None:
        for name, state in states:
            self.add_clause(prefix + name, state)

    def add_polyline(self, name: str, p: Polyline, role: str = "curve") -> None:
        if role not in ROLES:
            raise ValueError(f"unknown polyline role {role}")
        self.artifacts["polylines"][name] = {
            "role": role,
            "closed": p.closed,
            "points": [list(v) for v in p.vertices],
        }

    def add_point(self, name: str, p: Any) -> None:
        self.artifacts["points"][name] = list(as_point(p))

    def add_face(self, name: str, runs: Sequence[Sequence[float]]) -> None:
        self.artifacts["faces"][name] = [[float(v) for v in r] for r in runs]

    def add_value(self, name: str, value: Any) -> None:
        self.artifacts["values"][name] = value

    def polyline(self, name: str) -> Optional[Polyline]:
        data = self.artifacts["polylines"].get(name)
        if data is None:
            return None
        return Polyline(tuple(as_point(v) for v in data["points"]), data["closed"])

    # ============ SERIALIZATION ============
    def to_dict(self) -> Dict[str, Any]:
        data = {
            "tool": TOOL,
            "version": self.version,
            "task": self.task,
            "status": self.status.value,
            "exit_code": self.exit_code,
            "tolerances": dict(self.tolerances),
            "clauses": [{"name": name, **state.to_dict()} for name, state in self.clauses],
            "certificates": [c.to_dict() for c in self.certificates],
            "undecided_boxes": [list(b.as_tuple()) for b in self.undecided_boxes],
            "artifacts": self.artifacts,
            "notes": list(self.notes),
            "timing": dict(self.timing),
        }
        return {key: _finite(data[key]) for key in KEY_ORDER}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Report":
        clauses = []
        for entry in data.get("clauses", []):
            entry = dict(entry)
            name = entry.pop("name")
            clauses.append((name, TriState.from_dict(entry)))
        artifacts = {"polylines": {}, "points": {}, "faces": {}, "values": {}}
        artifacts.update(data.get("artifacts") or {})
        return cls(
            task=data["task"],
            status=Status(data["status"]),
            tolerances=dict(data.get("tolerances") or {}),
            clauses=clauses,
            certificates=[FixedPointCertificate.from_dict(c) for c in data.get("certificates", [])],
            undecided_boxes=[Box(*b) for b in data.get("undecided_boxes", [])],
            artifacts=artifacts,
            notes=list(data.get("notes", [])),
            timing=dict(data.get("timing") or {}),
            version=data.get("version", __version__),
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    # ============ TEXT ============
    def to_text(self) -> str:
        lines = [f"{TOOL} {self.version} {self.task}: {self.status.value} (exit {self.exit_code})"]
        width = max([len(name) for name, _ in self.clauses] + [12])
        for name, state in self.clauses:
            detail = ""
            if state.margin is not None:
                detail += f" margin={fmt(state.margin)}"
            if state.resolution is not None:
                detail += f" resolution={fmt(state.resolution)}"
            if state.witness:
                detail += " witness=" + " ".join(fmt_point(w) for w in state.witness)
            if state.note:
                detail += f" ({state.note})"
            lines.append(f"  {name:<{width}} {state.verdict.value}{detail}")
        for k, cert in enumerate(self.certificates):
            lines.append(
                f"  fixed point {k}: {fmt_point(cert.approx, 12)} degree={cert.boundary_degree} "
                f"residual={fmt(cert.residual)} box={fmt_point(cert.box.lower_left)}"
                f"..{fmt_point((cert.box.xmax, cert.box.ymax))}"
            )
        if not self.certificates and self.task in ("CERTIFY", "CHECK_QIVT"):
            lines.append("  fixed points: none")
        if self.undecided_boxes:
            lines.append(f"  undecided boxes: {len(self.undecided_boxes)}")
        for name, value in self.artifacts["values"].items():
            lines.append(f"  {name} = {value}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        if "seconds" in self.timing:
            lines.append(f"  time: {format_time(self.timing['seconds'])}")
        return "\n".join(lines) + "\n"
