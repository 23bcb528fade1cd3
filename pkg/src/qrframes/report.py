"""Structured pass/fail records for numerical checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


def sig(x: float, digits: int) -> float:
    """Round ``x`` to ``digits`` significant digits (``-0.0`` becomes ``0.0``)."""
    if x == 0 or x != x:
        return 0.0 if x == 0 else x
    return float(f"{x:.{digits}g}") + 0.0


@dataclass
class Check:
    name: str
    passed: bool
    residual: float | None = None
    tolerance: float | None = None
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "passed": bool(self.passed)}
        if self.residual is not None:
            out["residual"] = sig(float(self.residual), 3)
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    """A named list of checks; the report passes when every check does."""

    subject: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name, passed, residual=None, tolerance=None, **detail) -> Check:
        check = Check(name, bool(passed), residual, tolerance, dict(detail))
        self.checks.append(check)
        return check

    def add_residual(self, name: str, residual: float, tolerance: float, **detail) -> Check:
        return self.add(name, residual < tolerance, float(residual), tolerance, **detail)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            res = "" if c.residual is None else f"  residual={sig(c.residual, 3):.3g}"
            out.append(f"[{mark}] {self.subject}: {c.name}{res}")
        return out
