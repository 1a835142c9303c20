from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


class PreconditionError(ValueError):
    """Inputs do not satisfy an operation's stated preconditions."""


def rational_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(value: Any) -> Fraction:
    """Accept ints, "p/q" strings, decimal strings and floats (taken as decimals)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


@dataclass
class ViolationReport:
    """Result of a brute-force check; empty ``violations`` means success."""

    name: str
    violations: list = field(default_factory=list)
    checked: int = 0
    mode: str = "exhaustive"
    preconditions: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.preconditions

    def merge(self, other: ViolationReport) -> ViolationReport:
        self.violations.extend(other.violations)
        self.preconditions.extend(other.preconditions)
        self.checked += other.checked
        return self

    def to_dict(self, limit: int = 20) -> dict:
        return {
            "check": self.name,
            "mode": self.mode,
            "checked": self.checked,
            "violation_count": len(self.violations),
            "violations": jsonable(self.violations[:limit]),
            "precondition_failures": jsonable(self.preconditions[:limit]),
            "ok": self.ok,
        }
