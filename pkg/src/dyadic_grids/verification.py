#!/usr/bin/env python3
"""Verification report shared by all theorem checks."""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from dyadic_grids.errors import VerificationError
from dyadic_grids.exact import format_rational

log = logging.getLogger(__name__)

RTOL = 1e-9


def within(measured: float, bound: float, rtol: float = RTOL) -> bool:
    """measured <= bound up to a relative tolerance."""
    return measured <= bound * (1.0 + rtol) or measured <= bound + rtol * abs(bound)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "to_json"):
        return value.to_json()
    if hasattr(value, "item"):
        return value.item()
    return value


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one theorem check: measured constant against its bound."""

    name: str
    passed: bool
    measured: float
    bound: float
    delta: Fraction | None = None
    checks: int = 1
    witness: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        """1 - measured/bound; negative when the bound is violated."""
        if self.bound == 0 or not math.isfinite(self.bound):
            return 0.0 if self.measured <= self.bound else -math.inf
        return 1.0 - self.measured / self.bound

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "delta": format_rational(self.delta) if self.delta is not None else None,
            "pass": self.passed,
            "measured": _jsonable(float(self.measured)),
            "bound": _jsonable(float(self.bound)),
            "slack": _jsonable(float(self.slack)),
            "checks": self.checks,
            "witness": _jsonable(self.witness),
            "details": _jsonable(self.details),
        }

    def require_passed(self) -> "VerificationReport":
        if not self.passed:
            raise VerificationError(
                f"{self.name} failed: measured {self.measured!r} > bound {self.bound!r}"
                f" (witness {self.witness})"
            )
        return self

    def logged(self) -> "VerificationReport":
        log.info(
            "%s delta=%s measured=%.6g bound=%.6g pass=%s",
            self.name,
            format_rational(self.delta) if self.delta is not None else "-",
            self.measured,
            self.bound,
            self.passed,
        )
        return self


def merge_reports(name: str, reports: Iterable[VerificationReport]) -> VerificationReport:
    """Combine reports: passes iff all pass, witness of the smallest slack."""
    reports = list(reports)
    if not reports:
        return VerificationReport(name, True, 0.0, 0.0, checks=0)
    worst = min(reports, key=lambda r: r.slack)
    failed = [r for r in reports if not r.passed]
    witness = (failed[0] if failed else worst).witness
    return VerificationReport(
        name=name,
        passed=not failed,
        measured=worst.measured,
        bound=worst.bound,
        delta=worst.delta,
        checks=sum(r.checks for r in reports),
        witness=dict(witness),
        details={"failures": len(failed), "worst": worst.name},
    )
