#!/usr/bin/env python3
"""
Haar analysis on the standard and shifted grids, dyadic and continuous BMO.

Normalization: h_I = |I|^(-1/2) on the left half of I and -|I|^(-1/2) on
the right half. Coefficients are exact cuts of piecewise-constant data, the
shifted grid being resolved by subdividing mesh cells.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np

from dyadic_grids.covering import ArbitraryInterval
from dyadic_grids.errors import DomainError, ResolutionError, VerificationError
from dyadic_grids.exact import parse_rational
from dyadic_grids.grids import GridFamily, GridSpec, IntervalId, check_level
from dyadic_grids.mesh import (
    ContinuousFamily,
    IntervalBatch,
    IntervalFamily,
    MeshFunction1D,
    MeshIntegrator,
    descendant_sums,
    family_batches,
    grid_level_batch,
    resolution_for,
)
from dyadic_grids.verification import RTOL, VerificationReport

log = logging.getLogger(__name__)

DEFAULT_K_CAP = 64.0


@dataclass(frozen=True, eq=False)
class HaarCoefficients:
    """Haar coefficients of a mesh function on one grid.

    `levels[n]` holds (f, h_I) for the level-n intervals of `batches[n]`, for
    n from the coarsest domain level to L-1. `coarse` holds the inner
    products with |I|^(-1/2)·1_I for the coarsest-level intervals, which
    complete the Haar system on the domain.
    """

    grid: GridSpec
    resolution: int
    batches: dict[int, IntervalBatch]
    levels: dict[int, np.ndarray]
    coarse_batch: IntervalBatch
    coarse: np.ndarray

    @property
    def cutoff_level(self) -> int:
        return max(self.levels) if self.levels else self.grid.domain.coarsest_level - 1

    def items(self) -> Iterator[tuple[IntervalId, float]]:
        for level in sorted(self.levels):
            batch = self.batches[level]
            for i, value in enumerate(self.levels[level]):
                label = batch.label(i)
                assert isinstance(label, IntervalId)
                yield label, float(value)

    def coefficient(self, interval_id: IntervalId) -> float:
        """(f, h_I) for one interval; 0 for intervals without a coefficient."""
        if interval_id.grid != self.grid or interval_id.level not in self.levels:
            return 0.0
        batch = self.batches[interval_id.level]
        assert batch.indices is not None
        hits = np.flatnonzero(batch.indices == interval_id.index)
        return float(self.levels[interval_id.level][hits[0]]) if len(hits) else 0.0

    def energy(self) -> float:
        """Σ (f, h_I)² + Σ coarse², the right side of Parseval."""
        parts = [self.coarse**2] + [c**2 for c in self.levels.values()]
        return math.fsum(np.concatenate(parts))

    def masked(
        self, keep: dict[int, np.ndarray], coarse: bool = False
    ) -> "HaarCoefficients":
        """Copy with coefficients outside `keep` (and optionally the coarse terms) zeroed."""
        levels = {n: np.where(keep.get(n, False), c, 0.0) for n, c in self.levels.items()}
        coarse_values = self.coarse if coarse else np.zeros_like(self.coarse)
        return HaarCoefficients(
            self.grid, self.resolution, self.batches, levels, self.coarse_batch, coarse_values
        )

    def to_json(self) -> list[dict[str, Any]]:
        return [{"interval": i.to_json(), "coeff": c} for i, c in self.items()]


def haar_transform(f: MeshFunction1D, grid: GridSpec) -> HaarCoefficients:
    """Haar coefficients of f on every grid interval of levels coarsest..L-1.

    Raises:
        DomainError: If grid and function live on different domains.
    """
    domain = f.domain
    if grid.domain != domain:
        raise DomainError(f"Grid {grid.label} lives on {grid.domain}, function on {domain}")
    resolution = resolution_for([grid])
    integrator = MeshIntegrator(domain, f.values)
    batches: dict[int, IntervalBatch] = {}
    levels: dict[int, np.ndarray] = {}
    for level in range(domain.coarsest_level, domain.finest_level):
        batch = grid_level_batch(grid, level, resolution)
        left, right = batch.halves()
        scale = np.sqrt(batch.measures)
        levels[level] = (integrator.integrate(left) - integrator.integrate(right)) / scale
        batches[level] = batch
    coarse_batch = grid_level_batch(grid, domain.coarsest_level, resolution)
    coarse = integrator.integrate(coarse_batch) / np.sqrt(coarse_batch.measures)
    log.debug("haar transform on %s: %d levels", grid.label, len(levels))
    return HaarCoefficients(grid, resolution, batches, levels, coarse_batch, coarse)


def _require_standard(grid: GridSpec) -> None:
    if grid.family is not GridFamily.STANDARD:
        raise ResolutionError(
            f"Synthesis needs mesh-aligned Haar functions, {grid.label} is not aligned"
        )


def inverse_transform(coefficients: HaarCoefficients) -> MeshFunction1D:
    """Σ (f, h_I) h_I plus the coarse terms, on the mesh.

    Raises:
        ResolutionError: For grids other than the standard one.
    """
    grid = coefficients.grid
    _require_standard(grid)
    domain = grid.domain
    # standard level batches partition the domain left to right
    values = np.repeat(
        coefficients.coarse / np.sqrt(coefficients.coarse_batch.measures),
        coefficients.coarse_batch.lengths[0],
    )
    for level in sorted(coefficients.levels):
        batch = coefficients.batches[level]
        amplitude = coefficients.levels[level] / np.sqrt(batch.measures)
        signed = np.stack([amplitude, -amplitude], axis=1).ravel()
        values = values + np.repeat(signed, batch.lengths[0] // 2)
    return MeshFunction1D(domain, values)


def project(f: MeshFunction1D, j: IntervalId) -> MeshFunction1D:
    """P_J f = Σ_{I ⊆ J} (f, h_I) h_I.

    Raises:
        ResolutionError: If J is not a standard interval.
        DomainError: If J's level is outside the domain.
    """
    _require_standard(j.grid)
    check_level(j.grid, j.level)
    coefficients = haar_transform(f, j.grid)
    keep = {}
    for level, batch in coefficients.batches.items():
        assert batch.indices is not None
        if level < j.level:
            keep[level] = np.zeros(len(batch), dtype=bool)
        else:
            keep[level] = (batch.indices // 2 ** (level - j.level)) == j.index
    return inverse_transform(coefficients.masked(keep))


class BMOMode(str, Enum):
    AVG = "avg"
    AVGP = "avgp"
    CARLESON = "carleson"


@dataclass(frozen=True)
class BMOReport:
    """BMO norms of one function over one family.

    `norm` is the value for the requested mode; the others are kept for the
    Jensen and Carleson comparisons.
    """

    family: str
    mode: BMOMode
    norm: float
    norm_avg: float
    norm_p: float
    norm_carleson: float | None
    argmax: IntervalId | ArbitraryInterval | None
    p: float = 2.0
    details: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "mode": self.mode.value,
            "norm": self.norm,
            "norm_avg": self.norm_avg,
            "norm_p": self.norm_p,
            "p": self.p,
            "norm_carleson": self.norm_carleson,
            "argmax": self.argmax.to_json() if self.argmax is not None else None,
        }


def _oscillations(
    f: MeshFunction1D, family: IntervalFamily, p: float
) -> tuple[list[IntervalBatch], list[np.ndarray], list[np.ndarray]]:
    """Mean oscillation and p-mean oscillation for every interval of the family."""
    integrator = MeshIntegrator(f.domain, f.values)
    batches = family_batches(f.domain, family)
    mean_osc, p_osc = [], []
    for batch in batches:
        averages = integrator.averages(batch)
        measures = batch.measures
        mean_osc.append(integrator.oscillation(batch, averages, 1.0) / measures)
        p_osc.append((integrator.oscillation(batch, averages, p) / measures) ** (1.0 / p))
    return batches, mean_osc, p_osc


def _sup_with_label(
    batches: list[IntervalBatch], values: list[np.ndarray]
) -> tuple[float, IntervalId | ArbitraryInterval | None]:
    best, where = 0.0, None
    for batch, vals in zip(batches, values, strict=True):
        if len(vals) == 0:
            continue
        i = int(np.argmax(vals))
        if where is None or vals[i] > best:
            best, where = float(vals[i]), batch.label(i)
    return best, where


def carleson_sums(
    coefficients: HaarCoefficients, subset: dict[int, np.ndarray] | None = None
) -> dict[int, np.ndarray]:
    """Σ_{I ⊆ J} (f, h_I)² for every J with Haar terms, keyed by J's level.

    With `subset`, only coefficients flagged there enter the sums.
    """
    squares = {
        n: c**2 if subset is None else np.where(subset[n], c**2, 0.0)
        for n, c in coefficients.levels.items()
    }
    sums = {}
    for parent_level, parent in coefficients.batches.items():
        total = np.zeros(len(parent))
        for child_level in range(parent_level, coefficients.cutoff_level + 1):
            total += descendant_sums(
                parent, coefficients.batches[child_level], squares[child_level]
            )
        sums[parent_level] = total
    return sums


def carleson_norm(
    coefficients: HaarCoefficients, subset: dict[int, np.ndarray] | None = None
) -> tuple[float, IntervalId | None]:
    """sup_J ((1/|J|) Σ_{I ⊆ J} (f, h_I)²)^(1/2)."""
    sums = carleson_sums(coefficients, subset)
    best, where = 0.0, None
    for level, total in sorted(sums.items()):
        batch = coefficients.batches[level]
        values = total / batch.measures
        if len(values) == 0:
            continue
        i = int(np.argmax(values))
        if where is None or values[i] > best:
            label = batch.label(i)
            assert isinstance(label, IntervalId)
            best, where = float(values[i]), label
    return math.sqrt(best), where


def bmo_dyadic(
    f: MeshFunction1D, grid: GridSpec, mode: BMOMode = BMOMode.AVG, p: float = 2.0
) -> BMOReport:
    """Dyadic BMO norm over the grid in the requested mode."""
    if p < 1:
        raise DomainError(f"Exponent p must be >= 1, got {p}")
    batches, mean_osc, p_osc = _oscillations(f, grid, p)
    norm_avg, arg_avg = _sup_with_label(batches, mean_osc)
    norm_p, arg_p = _sup_with_label(batches, p_osc)
    norm_carleson, arg_carleson = carleson_norm(haar_transform(f, grid))
    norm, argmax = {
        BMOMode.AVG: (norm_avg, arg_avg),
        BMOMode.AVGP: (norm_p, arg_p),
        BMOMode.CARLESON: (norm_carleson, arg_carleson),
    }[mode]
    return BMOReport(grid.label, mode, norm, norm_avg, norm_p, norm_carleson, argmax, p)


def bmo_continuous(
    f: MeshFunction1D, family: ContinuousFamily | None = None, p: float = 2.0
) -> BMOReport:
    """‖f‖_*: sup of the mean oscillation over the continuous family."""
    family = ContinuousFamily() if family is None else family
    batches, mean_osc, p_osc = _oscillations(f, family, p)
    norm_avg, arg_avg = _sup_with_label(batches, mean_osc)
    norm_p, _ = _sup_with_label(batches, p_osc)
    return BMOReport(family.label, BMOMode.AVG, norm_avg, norm_avg, norm_p, None, arg_avg, p)


def verify_carleson_chain(f: MeshFunction1D, grid: GridSpec) -> VerificationReport:
    """Carleson sums against oscillations at every grid interval J.

    (1/|J|) Σ_{I ⊆ J} (f, h_I)² <= (1/|J|) ∫_J |f - f_J|² holds on every
    grid (Bessel). On the standard grid additionally the mean oscillation
    over J is at most the Carleson norm.
    """
    coefficients = haar_transform(f, grid)
    sums = carleson_sums(coefficients)
    integrator = MeshIntegrator(f.domain, f.values)
    carleson, _ = carleson_norm(coefficients)
    scale = float(np.max(f.values**2, initial=0.0))
    worst, witness = -math.inf, None
    passed = True
    checks = 0
    for level, total in sums.items():
        batch = coefficients.batches[level]
        averages = integrator.averages(batch)
        measures = batch.measures
        variance = integrator.oscillation(batch, averages, 2.0) / measures
        energy = total / measures
        mean_osc = integrator.oscillation(batch, averages, 1.0) / measures
        ok = energy <= variance * (1 + RTOL) + 1e-12 * scale
        if grid.family is GridFamily.STANDARD:
            ok &= mean_osc <= carleson * (1 + RTOL) + 1e-12 * math.sqrt(scale)
        checks += len(batch)
        if not np.all(ok):
            passed = False
            i = int(np.flatnonzero(~ok)[0])
            witness = batch.label(i)
        gap = float((energy - variance).max(initial=-math.inf))
        if gap > worst:
            worst = gap
    report = VerificationReport(
        name=f"carleson_chain_{grid.label}",
        passed=passed,
        measured=max(worst, 0.0),
        bound=0.0,
        checks=checks,
        witness={"J": witness} if witness is not None else {},
        details={"carleson": carleson},
    )
    return report.logged()


def verify_bmo_intersection(
    f: MeshFunction1D, delta: Fraction | str, k_cap: float = DEFAULT_K_CAP
) -> VerificationReport:
    """max(‖f‖_d, ‖f‖_δ) <= ‖f‖_* exactly, and the reverse ratio monitored against k_cap.

    Raises:
        VerificationError: If the dyadic norms vanish while ‖f‖_* does not.
    """
    delta = parse_rational(delta)
    domain = f.domain
    standard = GridSpec.standard(domain)
    shifted = GridSpec.shifted(domain, delta)
    norm_std = bmo_dyadic(f, standard)
    norm_shf = bmo_dyadic(f, shifted)
    star = bmo_continuous(f, ContinuousFamily((standard, shifted)))
    dyadic_max = max(norm_std.norm, norm_shf.norm)
    forward = dyadic_max <= star.norm
    if dyadic_max == 0:
        if star.norm > 1e-12:
            raise VerificationError(
                f"Dyadic BMO norms vanish but the continuous norm is {star.norm!r}"
            )
        k_emp = 1.0
    else:
        k_emp = star.norm / dyadic_max
    log.info("reverse BMO ratio K_emp=%.4g (cap %.4g)", k_emp, k_cap)
    return VerificationReport(
        name="bmo_intersection",
        passed=forward and k_emp <= k_cap,
        measured=dyadic_max,
        bound=star.norm,
        delta=delta,
        witness={"Q": star.argmax} if star.argmax is not None else {},
        details={
            "std": norm_std.norm,
            "shifted": norm_shf.norm,
            "continuous": star.norm,
            "k_emp": k_emp,
            "k_cap": k_cap,
        },
    ).logged()


def _window_mask(coefficients: HaarCoefficients, n: int) -> dict[int, np.ndarray]:
    """Terms with 2^-n <= |I| <= 2^n and I inside [-2^n, 2^n)."""
    domain = coefficients.grid.domain
    keep = {}
    for level, batch in coefficients.batches.items():
        in_scale = -n <= level <= n
        if domain.is_torus or not in_scale:
            keep[level] = np.full(len(batch), in_scale)
            continue
        unit = batch.unit
        radius = Fraction(2) ** n
        lo = int((-radius - domain.left) / unit) if -radius > domain.left else 0
        hi = int((radius - domain.left) / unit)
        keep[level] = (batch.starts >= lo) & (batch.starts + batch.lengths <= hi)
    return keep


def vmo_truncation(f: MeshFunction1D, grid: GridSpec, n: int) -> MeshFunction1D:
    """f_n: the Haar terms of f inside [-2^n, 2^n) with scales between 2^-n and 2^n.

    Raises:
        DomainError: If n < 0.
        ResolutionError: For grids other than the standard one.
    """
    if n < 0:
        raise DomainError(f"Truncation index must be >= 0, got {n}")
    _require_standard(grid)
    coefficients = haar_transform(f, grid)
    return inverse_transform(coefficients.masked(_window_mask(coefficients, n)))


def vmo_tail_norms(f: MeshFunction1D, grid: GridSpec, n_max: int) -> list[float]:
    """Carleson norm of f - f_n for n = 0..n_max, computed on the dropped coefficients."""
    coefficients = haar_transform(f, grid)
    norms = []
    for n in range(n_max + 1):
        keep = _window_mask(coefficients, n)
        tail = {level: ~mask for level, mask in keep.items()}
        norms.append(carleson_norm(coefficients, tail)[0])
    return norms


def verify_vmo_tails(f: MeshFunction1D, grid: GridSpec, n_max: int) -> VerificationReport:
    """Tails ‖f - f_n‖ are non-increasing in n, agree with the synthesized
    differences, and vanish once f_n keeps every scale of the window.
    """
    norms = vmo_tail_norms(f, grid, n_max)
    domain = f.domain
    scale = max(float(np.max(np.abs(f.values))), 1.0) * 1e-12
    rising = [n for n in range(1, len(norms)) if norms[n] > norms[n - 1] * (1 + RTOL) + scale]
    mismatch = 0.0
    for n, tail in enumerate(norms):
        diff = MeshFunction1D(domain, f.values - vmo_truncation(f, grid, n).values)
        synthesized = carleson_norm(haar_transform(diff, grid))[0]
        mismatch = max(mismatch, abs(synthesized - tail))
    full = max(domain.finest_level - 1, domain.window_level)
    vanished = n_max < full or norms[full] <= scale
    return VerificationReport(
        name=f"vmo_tails_{grid.label}",
        passed=not rising and vanished and mismatch <= 1e3 * scale,
        measured=mismatch,
        bound=1e3 * scale,
        checks=len(norms),
        witness={"rising_at": rising} if rising else {},
        details={"tails": norms, "full_index": full, "vanished": vanished},
    ).logged()


@dataclass(frozen=True)
class VMOModuli:
    small_scales: float
    large_scales: float
    far_away: float

    def to_json(self) -> dict[str, float]:
        return {
            "small_scales": self.small_scales,
            "large_scales": self.large_scales,
            "far_away": self.far_away,
        }


def dyadic_vmo_moduli(
    f: MeshFunction1D,
    grid: GridSpec,
    fine_level: int,
    coarse_level: int,
    radius: Fraction | str | int,
) -> VMOModuli:
    """Carleson sups over intervals that are small, large, or far from the origin.

    small: J at levels >= fine_level; large: J at levels <= coarse_level;
    far: J disjoint from [-radius, radius) (always 0 on the torus).
    """
    radius = parse_rational(radius)
    coefficients = haar_transform(f, grid)
    sums = carleson_sums(coefficients)
    small = large = far = 0.0
    for level, total in sums.items():
        batch = coefficients.batches[level]
        values = total / batch.measures
        if len(values) == 0:
            continue
        if level >= fine_level:
            small = max(small, float(values.max()))
        if level <= coarse_level:
            large = max(large, float(values.max()))
        if not f.domain.is_torus:
            lefts = float(f.domain.left) + batch.starts * float(batch.unit)
            rights = lefts + batch.measures
            outside = (rights <= -float(radius)) | (lefts >= float(radius))
            if np.any(outside):
                far = max(far, float(values[outside].max()))
    return VMOModuli(math.sqrt(small), math.sqrt(large), math.sqrt(far))


def parseval_defect(f: MeshFunction1D, coefficients: HaarCoefficients) -> float:
    """(‖f‖² - Σ coefficients²)/‖f‖²; zero on the standard grid, >= 0 on any grid."""
    norm = f.l2_norm_squared()
    if norm == 0:
        return 0.0
    return (norm - coefficients.energy()) / norm


def check_parseval(
    f: MeshFunction1D, grid: GridSpec, tol: float = 1e-12
) -> VerificationReport:
    """Parseval on the standard grid, Bessel's inequality on the others."""
    defect = parseval_defect(f, haar_transform(f, grid))
    if grid.family is GridFamily.STANDARD:
        passed = abs(defect) <= tol
    else:
        passed = defect >= -tol
    return VerificationReport(
        name=f"parseval_{grid.label}",
        passed=passed,
        measured=abs(defect) if grid.family is GridFamily.STANDARD else -defect,
        bound=tol,
        details={"defect": defect},
    )
