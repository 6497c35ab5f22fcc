#!/usr/bin/env python3
"""
Two-parameter analysis on products of dyadic meshes.

Rectangles are products of one interval per axis. Each axis carries a
family of mesh-aligned intervals and the standard and shifted grid levels;
rectangle integrals come from overlap matrices, A1·F·A2ᵀ, so any
combination of axis families is one matrix product.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from dyadic_grids.covering import ArbitraryInterval
from dyadic_grids.errors import DomainError, ResolutionError
from dyadic_grids.exact import comparability_exponent, covering_constant, parse_rational
from dyadic_grids.grids import Domain, GridFamily, GridSpec, IntervalId
from dyadic_grids.mesh import (
    ContinuousFamily,
    IntervalBatch,
    MeshFunction2D,
    MeshWeight2D,
    aligned_batch,
    batch_of,
    center_containment,
    grid_level_batch,
    overlap_matrix,
    resolution_for,
)
from dyadic_grids.verification import VerificationReport, within
from dyadic_grids.weights import WeightClass, class_constant, measured_cdy

log = logging.getLogger(__name__)

LEVEL_CAP = 5
DEFAULT_PAIRING_CAP = 64.0


@dataclass(frozen=True)
class GridPair:
    first: GridSpec
    second: GridSpec

    def __post_init__(self) -> None:
        for grid in (self.first, self.second):
            if grid.family is GridFamily.NAIVE:
                raise DomainError("Grid pairs use the standard and shifted families")
        deltas = {g.delta for g in (self.first, self.second) if g.delta is not None}
        if len(deltas) > 1:
            raise DomainError(f"Both factors must share one delta, got {sorted(deltas)}")

    @property
    def delta(self) -> Fraction | None:
        return self.first.delta if self.first.delta is not None else self.second.delta

    @classmethod
    def all_pairs(
        cls, domains: tuple[Domain, Domain], delta: Fraction | str
    ) -> dict[str, "GridPair"]:
        """The four pairs dd, dδ, δd, δδ keyed by their short names."""
        delta = parse_rational(delta)
        d1, d2 = domains
        axes = (
            {"d": GridSpec.standard(d1), "δ": GridSpec.shifted(d1, delta)},
            {"d": GridSpec.standard(d2), "δ": GridSpec.shifted(d2, delta)},
        )
        return {a + b: cls(axes[0][a], axes[1][b]) for a in "dδ" for b in "dδ"}

    @property
    def domains(self) -> tuple[Domain, Domain]:
        return self.first.domain, self.second.domain

    @property
    def label(self) -> str:
        return f"{self.first.label}x{self.second.label}"


@dataclass(frozen=True)
class MeshRectangle:
    q1: ArbitraryInterval
    q2: ArbitraryInterval

    @property
    def area(self) -> Fraction:
        return self.q1.length * self.q2.length

    def to_json(self) -> dict[str, Any]:
        return {"q1": self.q1.to_json(), "q2": self.q2.to_json()}


@dataclass(frozen=True, eq=False)
class OpenSetApprox:
    """Finite union of aligned rectangles, held as a cell mask."""

    domains: tuple[Domain, Domain]
    rectangles: tuple[MeshRectangle, ...]

    def __post_init__(self) -> None:
        if not self.rectangles:
            raise DomainError("An open set needs at least one rectangle")

    @property
    def mask(self) -> np.ndarray:
        d1, d2 = self.domains
        rows = overlap_matrix(batch_of(d1, [r.q1 for r in self.rectangles], 1)) > 0
        cols = overlap_matrix(batch_of(d2, [r.q2 for r in self.rectangles], 1)) > 0
        return (rows.T.astype(np.int64) @ cols.astype(np.int64)) > 0

    @property
    def measure(self) -> Fraction:
        d1, d2 = self.domains
        return int(np.count_nonzero(self.mask)) * d1.cell_length * d2.cell_length


@dataclass(frozen=True, eq=False)
class AxisFamily:
    """Interval families of one axis: aligned intervals and two grids by level."""

    domain: Domain
    aligned: IntervalBatch
    standard: list[IntervalBatch]
    shifted: list[IntervalBatch]

    @classmethod
    def build(cls, domain: Domain, delta: Fraction | None) -> "AxisFamily":
        if domain.finest_level > LEVEL_CAP:
            log.warning(
                "2D finest level %d above the cap %d, rectangle scans are quadratic",
                domain.finest_level,
                LEVEL_CAP,
            )
        standard = GridSpec.standard(domain)
        shifted_batches = []
        if delta is not None:
            shifted = GridSpec.shifted(domain, delta)
            r = resolution_for([shifted])
            shifted_batches = [grid_level_batch(shifted, n, r) for n in domain.levels()]
        return cls(
            domain,
            aligned_batch(domain),
            [grid_level_batch(standard, n, 1) for n in domain.levels()],
            shifted_batches,
        )

    def part(self, name: str) -> list[IntervalBatch]:
        if name == "δ" and not self.shifted:
            raise DomainError("This axis family was built without a shifted grid")
        return {"aligned": [self.aligned], "d": self.standard, "δ": self.shifted}[name]

    def grid_part(self, grid: GridSpec) -> str:
        return "d" if grid.family is GridFamily.STANDARD else "δ"


@dataclass(frozen=True, eq=False)
class _AxisMatrices:
    batches: list[IntervalBatch]
    overlap: np.ndarray
    centers: np.ndarray

    @classmethod
    def of(cls, batches: list[IntervalBatch]) -> "_AxisMatrices":
        return cls(
            batches,
            np.concatenate([overlap_matrix(b) for b in batches]),
            np.concatenate([center_containment(b) for b in batches], axis=1),
        )

    @property
    def measures(self) -> np.ndarray:
        return np.concatenate([b.measures for b in self.batches])

    def label(self, i: int) -> IntervalId | ArbitraryInterval:
        for batch in self.batches:
            if i < len(batch):
                return batch.label(i)
            i -= len(batch)
        raise IndexError(i)


def _max_at_points(
    averages: np.ndarray, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    """M[x, y] = max of averages[i, j] over i with rows[x, i] and j with cols[y, j]."""
    n1, n2 = rows.shape[0], cols.shape[0]
    partial = np.empty((averages.shape[0], n2))
    for y in range(n2):
        masked = np.where(cols[y][None, :], averages, -np.inf)
        partial[:, y] = masked.max(axis=1, initial=-np.inf)
    out = np.empty((n1, n2))
    for x in range(n1):
        masked = np.where(rows[x][:, None], partial, -np.inf)
        out[x] = masked.max(axis=0, initial=-np.inf)
    return out


class RectangleAverages:
    """Rectangle averages of |f| (optionally ω-weighted) for every pair of axis parts."""

    PARTS = ("aligned", "d", "δ")

    def __init__(
        self, f: MeshFunction2D, delta: Fraction | None, w: MeshWeight2D | None = None
    ) -> None:
        if w is not None and w.domains != f.domains:
            raise DomainError("Weight and function live on different meshes")
        self.domains = f.domains
        self.parts = self.PARTS if delta is not None else self.PARTS[:2]
        self.axes = (
            AxisFamily.build(f.domains[0], delta),
            AxisFamily.build(f.domains[1], delta),
        )
        self.matrices = [
            {name: _AxisMatrices.of(axis.part(name)) for name in self.parts}
            for axis in self.axes
        ]
        magnitude = np.abs(f.values)
        self._numerator = magnitude if w is None else magnitude * w.values
        self._weight = None if w is None else w.values
        self._cache: dict[tuple[str, str], np.ndarray] = {}

    def block(self, first: str, second: str) -> np.ndarray:
        key = (first, second)
        if key not in self._cache:
            a1 = self.matrices[0][first]
            a2 = self.matrices[1][second]
            mass = a1.overlap @ self._numerator @ a2.overlap.T
            if self._weight is None:
                size = np.outer(a1.measures, a2.measures)
            else:
                size = a1.overlap @ self._weight @ a2.overlap.T
            self._cache[key] = mass / size
        return self._cache[key]

    def maximal(self, blocks: Iterable[tuple[str, str]]) -> np.ndarray:
        best = np.zeros((self.domains[0].n_cells, self.domains[1].n_cells))
        for first, second in blocks:
            rows = self.matrices[0][first].centers
            cols = self.matrices[1][second].centers
            best = np.maximum(best, _max_at_points(self.block(first, second), rows, cols))
        return best

    def continuous(self) -> np.ndarray:
        return self.maximal((a, b) for a in self.parts for b in self.parts)

    def pair(self, pair: GridPair) -> np.ndarray:
        key = (self.axes[0].grid_part(pair.first), self.axes[1].grid_part(pair.second))
        return self.maximal([key])


def strong_maximal(
    f: MeshFunction2D, family: GridPair | Fraction | str, w: MeshWeight2D | None = None
) -> MeshFunction2D:
    """Strong maximal function at cell centers.

    `family` is a grid pair, or δ for the continuous family (aligned
    rectangles plus the rectangles of all four pairs for that δ).
    """
    if isinstance(family, GridPair):
        averages = RectangleAverages(f, family.delta, w)
        return MeshFunction2D(f.domains, averages.pair(family))
    averages = RectangleAverages(f, parse_rational(family), w)
    return MeshFunction2D(f.domains, averages.continuous())


def weighted_strong_maximal(
    f: MeshFunction2D, w: MeshWeight2D, family: GridPair | Fraction | str
) -> MeshFunction2D:
    """M_s^ω f = sup over rectangles R ∋ x of ω(R)⁻¹ ∫_R |f|ω."""
    return strong_maximal(f, family, w)


def _pointwise_report(
    name: str,
    delta: Fraction,
    m_all: np.ndarray,
    variants: dict[str, np.ndarray],
    factor: float,
    use_sum: bool,
    details: dict[str, Any],
) -> VerificationReport:
    stacked = np.stack(list(variants.values()))
    total = stacked.sum(axis=0)
    subset_ok = bool(np.all(stacked <= m_all[None]))
    sum_ok = bool(np.all(total <= 4 * m_all * (1 + 1e-12)))
    reference = total if use_sum else stacked.max(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(m_all == 0, 0.0, m_all / reference)
    worst = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    measured = float(ratio[worst])
    return VerificationReport(
        name=name,
        passed=subset_ok and sum_ok and within(measured, factor),
        measured=measured,
        bound=factor,
        delta=delta,
        checks=3 * m_all.size,
        witness={"cell": [int(worst[0]), int(worst[1])]},
        details={
            "subset": subset_ok,
            "sum_at_most_4M": sum_ok,
            "M": float(m_all[worst]),
            **{k: float(v[worst]) for k, v in variants.items()},
            **details,
        },
    ).logged()


def verify_strong_maximal_comparability(
    f: MeshFunction2D, delta: Fraction | str
) -> VerificationReport:
    """Each pair variant <= M_s, their sum <= 4·M_s, and M_s <= C(δ)²·max of the four."""
    delta = parse_rational(delta)
    constant = float(covering_constant(delta))
    averages = RectangleAverages(f, delta)
    m_all = averages.continuous()
    variants = {
        name: averages.pair(pair) for name, pair in GridPair.all_pairs(f.domains, delta).items()
    }
    return _pointwise_report(
        "strong_maximal_comparability", delta, m_all, variants, constant**2, False, {}
    )


def product_cdy(w: MeshWeight2D, delta: Fraction | str) -> float:
    """C_dy of every row and column slice of ω, for both grids."""
    delta = parse_rational(delta)
    rows = [measured_cdy(w.row(j), delta) for j in range(w.domains[1].n_cells)]
    cols = [measured_cdy(w.column(i), delta) for i in range(w.domains[0].n_cells)]
    return max(rows + cols)


def verify_weighted(
    f: MeshFunction2D, w: MeshWeight2D, delta: Fraction | str, cdy: float | None = None
) -> VerificationReport:
    """Weighted strong maximal comparability with factor C(δ)²·C_dy^(2·log2(4C(δ)))."""
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    cdy = product_cdy(w, delta) if cdy is None else cdy
    factor = float(constant) ** 2 * cdy ** (2 * comparability_exponent(constant))
    m_all = weighted_strong_maximal(f, w, delta).values
    variants = {
        name: weighted_strong_maximal(f, w, pair).values
        for name, pair in GridPair.all_pairs(f.domains, delta).items()
    }
    return _pointwise_report(
        "weighted_strong_maximal_comparability",
        delta,
        m_all,
        variants,
        factor,
        True,
        {"cdy": cdy},
    )


def _rectangle_extrema_min(
    values: np.ndarray, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    """min of values over the cells touched by every rectangle (rows x cols)."""
    partial = np.empty((rows.shape[0], values.shape[1]))
    for i in range(rows.shape[0]):
        partial[i] = values[rows[i]].min(axis=0)
    out = np.empty((rows.shape[0], cols.shape[0]))
    for j in range(cols.shape[0]):
        out[:, j] = partial[:, cols[j]].min(axis=1)
    return out


def _biparameter_ap(
    w: MeshWeight2D, p: float, a1: _AxisMatrices, a2: _AxisMatrices
) -> np.ndarray:
    area = np.outer(a1.measures, a2.measures)
    avg = (a1.overlap @ w.values @ a2.overlap.T) / area
    if p == 1:
        low = _rectangle_extrema_min(w.values, a1.overlap > 0, a2.overlap > 0)
        return avg / low
    dual = (a1.overlap @ w.values ** (-1.0 / (p - 1.0)) @ a2.overlap.T) / area
    return avg * dual ** (p - 1.0)


def product_weight_check(
    w: MeshWeight2D, p: float, delta: Fraction | str
) -> VerificationReport:
    """Rectangle A_p constants: continuous <= C(δ)^(2p)·max over the four grid pairs.

    Also reports slice-uniform one-parameter constants (rows and columns)
    for the continuous, standard and shifted families.
    """
    if p < 1 or math.isinf(p):
        raise DomainError(f"Rectangle A_p needs 1 <= p < inf, got {p}")
    delta = parse_rational(delta)
    constant = float(covering_constant(delta))
    axes = (AxisFamily.build(w.domains[0], delta), AxisFamily.build(w.domains[1], delta))
    parts = RectangleAverages.PARTS
    matrices = [{name: _AxisMatrices.of(axis.part(name)) for name in parts} for axis in axes]
    blocks = {
        (a, b): _biparameter_ap(w, p, matrices[0][a], matrices[1][b])
        for a in parts
        for b in parts
    }
    continuous = max(float(v.max()) for v in blocks.values())
    pairs = {a + b: float(blocks[(a, b)].max()) for a in "dδ" for b in "dδ"}
    aligned = float(blocks[("aligned", "aligned")].max())
    monotone = all(v <= continuous for v in pairs.values())
    exponent = 2 * p if p > 1 else 2
    bound = constant**exponent * max(pairs.values())

    weight_class = WeightClass.ap(p)
    slices: dict[str, float] = {}
    for axis, (domain, count, take) in enumerate(
        (
            (w.domains[0], w.domains[1].n_cells, w.row),
            (w.domains[1], w.domains[0].n_cells, w.column),
        )
    ):
        families = {
            "continuous": ContinuousFamily(),
            "std": GridSpec.standard(domain),
            "shifted": GridSpec.shifted(domain, delta),
        }
        for name, family in families.items():
            slices[f"axis{axis + 1}_{name}"] = max(
                class_constant(take(k), weight_class, family).value for k in range(count)
            )
    return VerificationReport(
        name=f"product_weight_a{p:g}",
        passed=monotone and within(continuous, bound),
        measured=continuous,
        bound=bound,
        delta=delta,
        details={"pairs": pairs, "aligned": aligned, "monotone": monotone, "slices": slices},
    ).logged()


@dataclass(frozen=True, eq=False)
class HaarBasis:
    """Analysis matrix of one axis: coarse rows first, then Haar rows by level."""

    grid: GridSpec
    rows: np.ndarray
    labels: list[IntervalId]
    is_haar: np.ndarray
    batches: list[IntervalBatch]

    @classmethod
    def build(cls, grid: GridSpec) -> "HaarBasis":
        domain = grid.domain
        r = resolution_for([grid])
        coarse = grid_level_batch(grid, domain.coarsest_level, r)
        rows = [overlap_matrix(coarse) / np.sqrt(coarse.measures)[:, None]]
        labels = [coarse.label(i) for i in range(len(coarse))]
        flags = [np.zeros(len(coarse), dtype=bool)]
        batches = [coarse]
        for level in range(domain.coarsest_level, domain.finest_level):
            batch = grid_level_batch(grid, level, r)
            left, right = batch.halves()
            signed = overlap_matrix(left) - overlap_matrix(right)
            rows.append(signed / np.sqrt(batch.measures)[:, None])
            labels.extend(batch.label(i) for i in range(len(batch)))
            flags.append(np.ones(len(batch), dtype=bool))
            batches.append(batch)
        return cls(
            grid,
            np.concatenate(rows),
            [lab for lab in labels if isinstance(lab, IntervalId)],
            np.concatenate(flags),
            batches,
        )

    @property
    def lengths(self) -> np.ndarray:
        return np.array([float(label.length) for label in self.labels])

    @property
    def haar_labels(self) -> list[IntervalId]:
        return [lab for lab, haar in zip(self.labels, self.is_haar, strict=True) if haar]

    def haar_batch(self) -> IntervalBatch:
        """All Haar intervals of the basis as one batch (uniform resolution)."""
        haar = self.batches[1:]
        if not haar:
            empty = np.zeros(0, dtype=np.int64)
            return IntervalBatch(self.grid.domain, 1, empty, empty)
        return IntervalBatch(
            self.grid.domain,
            haar[0].resolution,
            np.concatenate([b.starts for b in haar]),
            np.concatenate([b.lengths for b in haar]),
        )


@dataclass(frozen=True, eq=False)
class HaarCoefficients2D:
    """(f, u⊗v) for every row u of the first basis and v of the second."""

    pair: GridPair
    first: HaarBasis
    second: HaarBasis
    values: np.ndarray

    @property
    def haar_block(self) -> np.ndarray:
        """The product-Haar coefficients (f, h_I⊗h_J) only."""
        return self.values[np.ix_(self.first.is_haar, self.second.is_haar)]

    def energy(self) -> float:
        return math.fsum((self.values**2).ravel())

    def to_json(self) -> list[dict[str, Any]]:
        out = []
        rows, cols = np.nonzero(self.values)
        for i, j in zip(rows.tolist(), cols.tolist(), strict=True):
            out.append(
                {
                    "first": self.first.labels[i].to_json(),
                    "second": self.second.labels[j].to_json(),
                    "haar": bool(self.first.is_haar[i] and self.second.is_haar[j]),
                    "coeff": float(self.values[i, j]),
                }
            )
        return out


def haar2_transform(f: MeshFunction2D, pair: GridPair) -> HaarCoefficients2D:
    if pair.domains != f.domains:
        raise DomainError(f"Pair {pair.label} does not match the function's meshes")
    first = HaarBasis.build(pair.first)
    second = HaarBasis.build(pair.second)
    return HaarCoefficients2D(pair, first, second, first.rows @ f.values @ second.rows.T)


def _descendant_matrix(basis: HaarBasis) -> np.ndarray:
    """D[a, b] = 1 when Haar interval b lies inside Haar interval a."""
    batch = basis.haar_batch()
    starts, lengths = batch.starts, batch.lengths
    offset = starts[None, :] - starts[:, None]
    if batch.domain.is_torus:
        offset %= batch.total_units
    inside = (offset >= 0) & (offset + lengths[None, :] <= lengths[:, None])
    return inside.astype(np.float64)


def _haar_overlap(basis: HaarBasis) -> np.ndarray:
    return overlap_matrix(basis.haar_batch()) > 0


@dataclass(frozen=True)
class ProductBMOReport:
    """max over Ω of (1/|Ω|) Σ_{R ⊆ Ω} (f, h_R)², a lower bound for the open-set sup."""

    pair: str
    value: float
    argmax: str
    per_omega: tuple[tuple[float, float], ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "pair": self.pair,
            "value": self.value,
            "argmax": self.argmax,
            "per_omega": [list(item) for item in self.per_omega],
        }


def product_bmo_dyadic(
    f: MeshFunction2D,
    pair: GridPair,
    omegas: Sequence[OpenSetApprox],
    include_rectangles: bool = True,
) -> ProductBMOReport:
    """Rectangle Carleson sums over the supplied open sets.

    With include_rectangles every single rectangle I×J of the pair is also
    used as an open set.

    Raises:
        DomainError: If no open set is supplied and rectangles are excluded.
    """
    if not omegas and not include_rectangles:
        raise DomainError("product_bmo_dyadic needs at least one open set")
    coefficients = haar2_transform(f, pair)
    squares = coefficients.haar_block**2
    touched1 = _haar_overlap(coefficients.first).astype(np.float64)
    touched2 = _haar_overlap(coefficients.second).astype(np.float64)
    best, where = 0.0, "none"
    per_omega = []
    for index, omega in enumerate(omegas):
        if omega.domains != f.domains:
            raise DomainError("Open set lives on other meshes")
        outside = 1.0 - omega.mask.astype(np.float64)
        inside = (touched1 @ outside @ touched2.T) == 0
        total = math.fsum(squares[inside])
        measure = float(omega.measure)
        per_omega.append((total, measure))
        if total / measure > best or where == "none":
            best, where = total / measure, f"omega[{index}]"
    if include_rectangles:
        d1 = _descendant_matrix(coefficients.first)
        d2 = _descendant_matrix(coefficients.second)
        sums = d1 @ squares @ d2.T
        first, second = coefficients.first, coefficients.second
        area = np.outer(first.lengths[first.is_haar], second.lengths[second.is_haar])
        ratios = sums / area
        if ratios.size:
            i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
            if ratios[i, j] > best or where == "none":
                best = float(ratios[i, j])
                where = f"{first.haar_labels[i]} x {second.haar_labels[j]}"
    return ProductBMOReport(pair.label, best, where, tuple(per_omega))


def verify_product_bmo(
    f: MeshFunction2D, pair: GridPair, omegas: Sequence[OpenSetApprox]
) -> VerificationReport:
    """Carleson sums over open sets against bounds that do not depend on the Ω list.

    Every R ⊆ Ω sees only f·1_Ω, so Bessel gives Σ_{R⊆Ω} (f, h_R)² <= ‖f·1_Ω‖₂²
    for each Ω, and the reported value is at most ‖f‖∞². Dropping the second
    half of the Ω list never raises the value.
    """
    full = product_bmo_dyadic(f, pair, omegas)
    partial = product_bmo_dyadic(f, pair, omegas[: len(omegas) // 2])
    squares = f.values**2
    localized = [math.fsum(squares[omega.mask]) * f.cell_area for omega in omegas]
    bessel_ok = all(
        within(total, energy) for (total, _), energy in zip(full.per_omega, localized, strict=True)
    )
    sup_squared = float(squares.max())
    monotone = partial.value <= full.value
    return VerificationReport(
        name=f"product_bmo_{pair.label}",
        passed=bessel_ok and monotone and within(full.value, sup_squared),
        measured=full.value,
        bound=sup_squared,
        delta=pair.delta,
        checks=2 * len(omegas) + 1,
        witness={"argmax": full.argmax},
        details={
            "value": full.value,
            "partial": partial.value,
            "monotone": monotone,
            "localized": bessel_ok,
            "energy": math.fsum(squares.ravel()) * f.cell_area,
        },
    ).logged()


def check_parseval_2d(
    f: MeshFunction2D, pair: GridPair, tol: float = 1e-12
) -> VerificationReport:
    """2D Parseval on the standard pair, Bessel's inequality on the others."""
    norm = f.l2_norm_squared()
    energy = haar2_transform(f, pair).energy()
    defect = 0.0 if norm == 0 else (norm - energy) / norm
    standard = pair.first.family is GridFamily.STANDARD and (
        pair.second.family is GridFamily.STANDARD
    )
    return VerificationReport(
        name=f"parseval_2d_{pair.label}",
        passed=abs(defect) <= tol if standard else defect >= -tol,
        measured=abs(defect) if standard else -defect,
        bound=tol,
        delta=pair.delta,
        details={"defect": defect},
    )


def product_h1_dyadic_norm(f: MeshFunction2D, pair: GridPair) -> float:
    """‖(Σ_R (f, h_R)² |R|⁻¹ χ_R)^(1/2)‖₁ over the product-Haar rectangles of the pair."""
    coefficients = haar2_transform(f, pair)
    first, second = coefficients.first, coefficients.second
    b1, b2 = first.haar_batch(), second.haar_batch()
    x1 = _subcell_containment(b1)
    x2 = _subcell_containment(b2)
    density = coefficients.haar_block**2 / np.outer(b1.measures, b2.measures)
    square = x1 @ density @ x2.T
    area = float(b1.unit) * float(b2.unit)
    return math.fsum(np.sqrt(np.maximum(square, 0.0)).ravel()) * area


def _subcell_containment(batch: IntervalBatch) -> np.ndarray:
    """(subcells x intervals) membership at the batch's resolution."""
    positions = np.arange(batch.total_units, dtype=np.int64)
    offset = positions[:, None] - batch.starts[None, :]
    if batch.domain.is_torus:
        offset %= batch.total_units
    return ((offset >= 0) & (offset < batch.lengths[None, :])).astype(np.float64)


def h1_bmo_pairing(
    f: MeshFunction2D,
    g: MeshFunction2D,
    pair: GridPair,
    cap: float = DEFAULT_PAIRING_CAP,
) -> VerificationReport:
    """|Σ_R (f, h_R)(g, h_R)| against ‖f‖_H¹·(rectangle Carleson norm of g), monitored by cap."""
    cf = haar2_transform(f, pair).haar_block
    cg = haar2_transform(g, pair).haar_block
    pairing = abs(math.fsum((cf * cg).ravel()))
    h1 = product_h1_dyadic_norm(f, pair)
    carleson = math.sqrt(product_bmo_dyadic(g, pair, []).value)
    denominator = h1 * carleson
    ratio = 0.0 if pairing == 0 else (pairing / denominator if denominator else math.inf)
    return VerificationReport(
        name="h1_bmo_pairing",
        passed=ratio <= cap,
        measured=ratio,
        bound=cap,
        details={"pairing": pairing, "h1": h1, "carleson": carleson, "pair": pair.label},
    ).logged()


def vmo_truncation_2d(f: MeshFunction2D, pair: GridPair, n: int) -> MeshFunction2D:
    """f_n: product-Haar terms with both sides in [2^-n, 2^n] and inside [-2^n, 2^n)².

    Raises:
        ResolutionError: Unless both grids are standard.
        DomainError: If n < 0.
    """
    if n < 0:
        raise DomainError(f"Truncation index must be >= 0, got {n}")
    if GridFamily.SHIFTED in (pair.first.family, pair.second.family):
        raise ResolutionError("Product synthesis needs the standard pair")
    coefficients = haar2_transform(f, pair)
    keep1 = _axis_window(coefficients.first, n)
    keep2 = _axis_window(coefficients.second, n)
    kept = np.where(np.outer(keep1, keep2), coefficients.values, 0.0)
    cell = float(pair.first.domain.cell_length) * float(pair.second.domain.cell_length)
    values = coefficients.first.rows.T @ kept @ coefficients.second.rows / cell
    return MeshFunction2D(f.domains, values)


def _axis_window(basis: HaarBasis, n: int) -> np.ndarray:
    radius = Fraction(2) ** n
    keep = []
    for label, haar in zip(basis.labels, basis.is_haar, strict=True):
        in_scale = -n <= label.level <= n
        inside = basis.grid.domain.is_torus or (
            -radius <= label.left and label.left + label.length <= radius
        )
        keep.append(bool(haar and in_scale and inside))
    return np.array(keep, dtype=bool)
