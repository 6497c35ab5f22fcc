#!/usr/bin/env python3
"""
Mesh function files and verification report files.

JSON files hold {"domain": {...}, "values": [...]} (1D) or
{"domains": [{...}, {...}], "values": [[...], ...]} (2D). Floats are written
with their shortest round-trip representation, so loading a written file
gives back the same binary64 values. CSV files carry the domain as a
comment header followed by one row per cell (2D: one row per first-axis
cell).
"""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from dyadic_grids.errors import DomainError
from dyadic_grids.grids import Domain
from dyadic_grids.mesh import MeshFunction1D, MeshFunction2D, MeshWeight1D, MeshWeight2D
from dyadic_grids.verification import VerificationReport
from dyadic_grids.version import __version__

log = logging.getLogger(__name__)

SCHEMA = 1

MeshData = MeshFunction1D | MeshFunction2D


def function_to_json(f: MeshData) -> dict[str, Any]:
    if isinstance(f, MeshFunction1D):
        return {"domain": f.domain.to_json(), "values": [float(v) for v in f.values]}
    return {
        "domains": [d.to_json() for d in f.domains],
        "values": [[float(v) for v in row] for row in f.values],
    }


def function_from_json(data: dict[str, Any], weight: bool = False) -> MeshData:
    """Build a mesh function (or weight) from its JSON form.

    Raises:
        DomainError: On a malformed document.
    """
    try:
        if "domain" in data:
            domain = Domain.from_json(data["domain"])
            cls1 = MeshWeight1D if weight else MeshFunction1D
            return cls1(domain, np.asarray(data["values"], dtype=np.float64))
        domains = tuple(Domain.from_json(d) for d in data["domains"])
        if len(domains) != 2:
            raise DomainError(f"Expected two domains, got {len(domains)}")
        cls2 = MeshWeight2D if weight else MeshFunction2D
        return cls2((domains[0], domains[1]), np.asarray(data["values"], dtype=np.float64))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"Malformed mesh function document: {exc}") from exc


def _write_csv(path: Path, f: MeshData) -> None:
    header = function_to_json(f)
    header.pop("values")
    with path.open("w", newline="") as fh:
        fh.write(f"# {json.dumps(header)}\n")
        writer = csv.writer(fh)
        if isinstance(f, MeshFunction1D):
            writer.writerow(["value"])
            writer.writerows([repr(float(v))] for v in f.values)
        else:
            writer.writerow([f"y{j}" for j in range(f.values.shape[1])])
            writer.writerows([repr(float(v)) for v in row] for row in f.values)


def _read_csv(path: Path) -> dict[str, Any]:
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise DomainError(f"{path} lacks the domain header comment")
        data = json.loads(first[1:])
        rows = list(csv.reader(fh))[1:]
    if "domain" in data:
        data["values"] = [float(row[0]) for row in rows]
    else:
        data["values"] = [[float(v) for v in row] for row in rows]
    return data


def save_function(path: str | Path, f: MeshData) -> Path:
    """Write a mesh function as JSON or CSV, chosen by the file suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".csv":
        _write_csv(path, f)
    else:
        path.write_text(json.dumps(function_to_json(f)) + "\n")
    log.debug("wrote %s", path)
    return path


def load_function(path: str | Path, weight: bool = False) -> MeshData:
    """Read a mesh function (weight=True: a positive weight) from JSON or CSV."""
    path = Path(path)
    if not path.exists():
        raise DomainError(f"No such file: {path}")
    if path.suffix.lower() == ".csv":
        data = _read_csv(path)
    else:
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path} is not valid JSON: {exc}") from exc
    return function_from_json(data, weight)


def report_document(
    suite: str, reports: list[VerificationReport], extra: dict[str, Any] | None = None
) -> dict[str, Any]:
    """Versioned report document; `generated_at` is the only non-deterministic field."""
    return {
        "schema": SCHEMA,
        "suite": suite,
        "version": __version__,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "pass": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
        **(extra or {}),
    }


def write_report(path: str | Path, document: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
    log.info("report written to %s", path)
    return path


def write_constants_csv(path: str | Path, rows: list[dict[str, Any]]) -> Path:
    """Constant tables, one row per report, columns from the first row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return path
