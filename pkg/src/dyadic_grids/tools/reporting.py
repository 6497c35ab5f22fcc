#!/usr/bin/env python3
"""
Console presentation of verification reports and rows for the constants CSV.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

from typing import Iterable

from dyadic_grids.exact import format_rational
from dyadic_grids.verification import VerificationReport


def _delta_text(report: VerificationReport) -> str:
    return "-" if report.delta is None else format_rational(report.delta)


def present_results(
    reports: list[VerificationReport], execution_time: float, title: str = "Verification Results"
) -> None:
    """Print reports as a table followed by a pass/fail summary."""
    print(f"\n{title}")
    print("=" * 78)
    print(f"{'Check':<36} {'Delta':>6} {'Measured':>11} {'Bound':>11} {'Slack':>7} {'':>4}")
    print("-" * 78)
    for report in reports:
        status = "ok" if report.passed else "FAIL"
        print(
            f"{report.name[:36]:<36} {_delta_text(report):>6} {report.measured:11.4g} "
            f"{report.bound:11.4g} {report.slack:7.3f} {status:>4}"
        )

    failed = [r for r in reports if not r.passed]
    print(f"\nCompleted {len(reports)} checks in {execution_time:.3f} seconds")
    print(f"Total cases checked: {sum(r.checks for r in reports)}")
    if failed:
        print(f"Failed: {', '.join(r.name for r in failed)}")
        for report in failed:
            print(f"  {report.name} witness: {report.witness}")
    else:
        print("All checks passed")


def constant_rows(reports: Iterable[VerificationReport]) -> list[dict[str, object]]:
    """Flat rows for the constants CSV export."""
    return [
        {
            "name": r.name,
            "delta": _delta_text(r),
            "measured": r.measured,
            "bound": r.bound,
            "slack": r.slack,
            "checks": r.checks,
            "passed": r.passed,
        }
        for r in reports
    ]
