"""Result objects returned by the checkers."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass(frozen=True)
class Violation:
    check: str
    message: str
    step: Optional[int] = None
    node: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"check": self.check, "step": self.step, "node": self.node, "message": self.message}


@dataclass
class Report:
    """Outcome of one family of checks over a trace.

    ``checks`` lists what was evaluated, ``violations`` what failed,
    ``notes`` what could not be decided (for instance a trace too short to
    contain enough rounds).
    """

    name: str
    checks: List[str] = field(default_factory=list)
    violations: List[Violation] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def check(self, name: str) -> None:
        if name not in self.checks:
            self.checks.append(name)

    def fail(self, check: str, message: str, step: Optional[int] = None, node: Optional[int] = None) -> None:
        self.check(check)
        self.violations.append(Violation(check, message, step, node))

    def merge(self, other: "Report") -> None:
        for name in other.checks:
            self.check(name)
        self.violations.extend(other.violations)
        self.notes.extend(other.notes)
        self.metrics.update(other.metrics)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "pass": self.ok,
            "checks": list(self.checks),
            "violations": [v.to_dict() for v in self.violations],
            "notes": list(self.notes),
            "metrics": dict(self.metrics),
        }
