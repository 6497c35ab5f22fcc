#!/usr/bin/env python3
"""
Piecewise-constant functions and weights on the finest dyadic mesh.

Intervals are handled in batches (`IntervalBatch`) of integer positions
measured from the domain's left end in units of 2^-L/resolution. With
resolution q for δ = p/q every shifted-grid endpoint up to level L is a
unit boundary, so integrals over shifted intervals are exact cuts of the
piecewise-constant data rather than snapped approximations.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from dyadic_grids.covering import ArbitraryInterval, cover, cover_aligned
from dyadic_grids.errors import DomainError, ResolutionError
from dyadic_grids.exact import (
    DyadicValue,
    comparability_exponent,
    covering_constant,
    format_rational,
    parse_rational,
)
from dyadic_grids.grids import Domain, GridSpec, IntervalId, check_level
from dyadic_grids.verification import VerificationReport, within

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MeshFunction1D:
    """Real samples, one per mesh cell of length 2^-L."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.domain.n_cells,):
            raise DomainError(
                f"Expected {self.domain.n_cells} values for {self.domain}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("Mesh values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        self._validate()

    def _validate(self) -> None:
        pass

    @classmethod
    def constant(cls, domain: Domain, value: float) -> "MeshFunction1D":
        return cls(domain, np.full(domain.n_cells, float(value)))

    @property
    def cell_length(self) -> float:
        return float(self.domain.cell_length)

    def l2_norm_squared(self) -> float:
        return math.fsum(self.values**2) * self.cell_length


class MeshWeight1D(MeshFunction1D):
    """Strictly positive mesh samples."""

    def _validate(self) -> None:
        if not np.all(self.values > 0):
            raise DomainError("Weights must be strictly positive on every cell")


@dataclass(frozen=True, eq=False)
class MeshFunction2D:
    """Samples on the product of two meshes, axis 0 = first factor."""

    domains: tuple[Domain, Domain]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        expected = (self.domains[0].n_cells, self.domains[1].n_cells)
        if values.shape != expected:
            raise DomainError(f"Expected shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("Mesh values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        self._validate()

    def _validate(self) -> None:
        pass

    @classmethod
    def constant(cls, domains: tuple[Domain, Domain], value: float) -> "MeshFunction2D":
        return cls(domains, np.full((domains[0].n_cells, domains[1].n_cells), float(value)))

    @property
    def cell_area(self) -> float:
        return float(self.domains[0].cell_length * self.domains[1].cell_length)

    def l2_norm_squared(self) -> float:
        return math.fsum((self.values**2).ravel()) * self.cell_area


class MeshWeight2D(MeshFunction2D):
    def _validate(self) -> None:
        if not np.all(self.values > 0):
            raise DomainError("Weights must be strictly positive on every cell")

    def row(self, index: int) -> MeshWeight1D:
        """The 1D weight x -> w(x, y_index)."""
        return MeshWeight1D(self.domains[0], self.values[:, index])

    def column(self, index: int) -> MeshWeight1D:
        """The 1D weight y -> w(x_index, y)."""
        return MeshWeight1D(self.domains[1], self.values[index, :])


def compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """Prefix sums along axis 0 with Neumaier compensation, leading zero row included."""
    values = np.asarray(values, dtype=np.float64)
    out = np.zeros((values.shape[0] + 1, *values.shape[1:]))
    total = np.zeros(values.shape[1:])
    compensation = np.zeros(values.shape[1:])
    for i, x in enumerate(values):
        t = total + x
        compensation += np.where(
            np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total
        )
        total = t
        out[i + 1] = total + compensation
    return out


@dataclass(frozen=True, eq=False)
class IntervalBatch:
    """Intervals [start, start + length) in units of 2^-L/resolution.

    Positions are measured from the domain's left end. Torus intervals may
    wrap past the right end; line intervals lie inside the window. Grid
    batches also carry their grid, level and interval indices.
    """

    domain: Domain
    resolution: int
    starts: np.ndarray
    lengths: np.ndarray
    grid: GridSpec | None = None
    level: int | None = None
    indices: np.ndarray | None = None

    def __len__(self) -> int:
        return int(self.starts.shape[0])

    @property
    def total_units(self) -> int:
        return self.domain.n_cells * self.resolution

    @property
    def unit(self) -> Fraction:
        return self.domain.cell_length / self.resolution

    @property
    def measures(self) -> np.ndarray:
        return self.lengths * float(self.unit)

    def label(self, i: int) -> IntervalId | ArbitraryInterval:
        """The i-th interval as an IntervalId (grid batches) or ArbitraryInterval."""
        if self.grid is not None and self.level is not None and self.indices is not None:
            return IntervalId(self.grid, self.level, int(self.indices[i]))
        return ArbitraryInterval(
            self.domain.left + int(self.starts[i]) * self.unit,
            int(self.lengths[i]) * self.unit,
            self.domain,
        )

    def at_resolution(self, resolution: int) -> "IntervalBatch":
        if resolution % self.resolution:
            raise ResolutionError(
                f"Resolution {resolution} is not a multiple of {self.resolution}"
            )
        factor = resolution // self.resolution
        return IntervalBatch(
            self.domain,
            resolution,
            self.starts * factor,
            self.lengths * factor,
            self.grid,
            self.level,
            self.indices,
        )

    def select(self, mask: np.ndarray) -> "IntervalBatch":
        return IntervalBatch(
            self.domain,
            self.resolution,
            self.starts[mask],
            self.lengths[mask],
            self.grid,
            self.level,
            None if self.indices is None else self.indices[mask],
        )

    def halves(self) -> tuple["IntervalBatch", "IntervalBatch"]:
        """Left and right halves of every interval."""
        if np.any(self.lengths % 2):
            raise ResolutionError("Halves are not resolved at this resolution")
        half = self.lengths // 2
        right_starts = self.starts + half
        if self.domain.is_torus:
            right_starts = right_starts % self.total_units
        return (
            IntervalBatch(self.domain, self.resolution, self.starts, half),
            IntervalBatch(self.domain, self.resolution, right_starts, half),
        )


def aligned_batch(
    domain: Domain, min_cells: int = 1, max_cells: int | None = None
) -> IntervalBatch:
    """All mesh-aligned intervals, grouped by length, starts ascending.

    On the torus every arc of length < 1 appears once per starting cell and
    the full circle once: N(N-1)+1 intervals. On the line window there are
    N(N+1)/2.
    """
    n = domain.n_cells
    max_cells = n if max_cells is None else min(max_cells, n)
    starts: list[np.ndarray] = []
    lengths: list[np.ndarray] = []
    for length in range(max(min_cells, 1), max_cells + 1):
        if domain.is_torus:
            count = n if length < n else 1
        else:
            count = n - length + 1
        starts.append(np.arange(count, dtype=np.int64))
        lengths.append(np.full(count, length, dtype=np.int64))
    if not starts:
        empty = np.zeros(0, dtype=np.int64)
        return IntervalBatch(domain, 1, empty, empty)
    return IntervalBatch(domain, 1, np.concatenate(starts), np.concatenate(lengths))


def enumerate_intervals(
    domain: Domain, min_len: DyadicValue | Fraction | str
) -> Iterator[ArbitraryInterval]:
    """Every mesh-aligned interval with length >= min_len, in batch order.

    Raises:
        ResolutionError: If min_len is below the cell length.
    """
    if isinstance(min_len, DyadicValue):
        min_len = min_len.to_fraction()
    min_len = parse_rational(min_len)
    if min_len < domain.cell_length:
        raise ResolutionError(
            f"min_len {format_rational(min_len)} below cell length 2^-{domain.finest_level}"
        )
    min_cells = math.ceil(min_len / domain.cell_length)
    batch = aligned_batch(domain, min_cells)
    for i in range(len(batch)):
        label = batch.label(i)
        assert isinstance(label, ArbitraryInterval)
        yield label


def resolution_for(grids: Iterable[GridSpec], extra_levels: int = 0) -> int:
    """Smallest subdivision of the mesh cells that resolves every grid up to level L + extra_levels."""
    resolution = 1
    for grid in grids:
        if grid.delta is None:
            continue
        denominator = grid.delta.denominator
        needed = denominator // math.gcd(denominator, 2**grid.domain.finest_level)
        resolution = math.lcm(resolution, needed)
    return resolution * 2**extra_levels


def grid_level_batch(grid: GridSpec, level: int, resolution: int) -> IntervalBatch:
    """All level-n intervals of the grid that lie in the domain, index ascending.

    On the torus these are all 2^n arcs; on the line only intervals fully
    inside the window are kept.

    Raises:
        ResolutionError: If the level's endpoints are not unit boundaries.
    """
    domain = grid.domain
    scale = Fraction(resolution * 2**domain.finest_level)
    span_exact = Fraction(2) ** (-level) * scale
    offset_exact = (grid.offset(level) - domain.left) * scale
    if span_exact.denominator != 1 or offset_exact.denominator != 1:
        raise ResolutionError(
            f"Level {level} of {grid.label} is not resolved at resolution {resolution}"
        )
    span = int(span_exact)
    offset = int(offset_exact)
    total = domain.n_cells * resolution
    if domain.is_torus:
        if level < 0:
            raise DomainError(f"Level {level} is negative on the torus")
        indices = np.arange(2**level, dtype=np.int64)
        starts = (offset + indices * span) % total
    else:
        k_first = -(offset // span)
        k_last = (total - span - offset) // span
        indices = np.arange(k_first, k_last + 1, dtype=np.int64)
        starts = offset + indices * span
    lengths = np.full(indices.shape, span, dtype=np.int64)
    return IntervalBatch(domain, resolution, starts, lengths, grid, level, indices)


def grid_batches(
    grid: GridSpec, resolution: int, levels: Iterable[int] | None = None
) -> list[IntervalBatch]:
    """Level batches of a grid, coarsest first (default: every domain level)."""
    if levels is None:
        levels = grid.domain.levels()
    return [grid_level_batch(grid, n, resolution) for n in levels]


def batch_of(
    domain: Domain, intervals: Sequence[ArbitraryInterval | IntervalId], resolution: int
) -> IntervalBatch:
    """Convert explicit intervals to a batch at the given resolution.

    Raises:
        ResolutionError: If an endpoint is not a unit boundary.
        DomainError: If a line interval leaves the window.
    """
    scale = resolution * 2**domain.finest_level
    starts, lengths = [], []
    for item in intervals:
        left = (item.left - domain.left) * scale
        length = item.length * scale
        if left.denominator != 1 or length.denominator != 1:
            raise ResolutionError(f"Interval {item} is not aligned at resolution {resolution}")
        start = int(left)
        if domain.is_torus:
            if length > domain.n_cells * resolution:
                raise DomainError(f"Interval {item} longer than the torus")
            start %= domain.n_cells * resolution
        elif start < 0 or start + int(length) > domain.n_cells * resolution:
            raise DomainError(f"Interval {item} leaves the window of {domain}")
        starts.append(start)
        lengths.append(int(length))
    return IntervalBatch(
        domain, resolution, np.array(starts, dtype=np.int64), np.array(lengths, dtype=np.int64)
    )


class RangeExtrema:
    """Sparse tables for O(1) min/max over cell ranges [lo, hi)."""

    def __init__(self, values: np.ndarray) -> None:
        self._min = [np.asarray(values, dtype=np.float64)]
        self._max = [np.asarray(values, dtype=np.float64)]
        width = 1
        while 2 * width <= len(values):
            prev_min, prev_max = self._min[-1], self._max[-1]
            self._min.append(np.minimum(prev_min[:-width], prev_min[width:]))
            self._max.append(np.maximum(prev_max[:-width], prev_max[width:]))
            width *= 2

    def query(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        span = hi - lo
        k = np.floor(np.log2(span)).astype(np.int64)
        # guard against log2 rounding at exact powers of two
        k = np.where(2 ** (k + 1) <= span, k + 1, k)
        k = np.where(2**k > span, k - 1, k)
        mins = np.empty(lo.shape)
        maxs = np.empty(lo.shape)
        for level in np.unique(k):
            sel = k == level
            width = 2**level
            a, b = lo[sel], hi[sel] - width
            mins[sel] = np.minimum(self._min[level][a], self._min[level][b])
            maxs[sel] = np.maximum(self._max[level][a], self._max[level][b])
        return mins, maxs


class MeshIntegrator:
    """Integrals, extrema and oscillations of one cell array over interval batches."""

    def __init__(self, domain: Domain, values: np.ndarray) -> None:
        self.domain = domain
        self.values = np.asarray(values, dtype=np.float64)
        self._prefix = compensated_cumsum(self.values)
        self._padded = np.append(self.values, 0.0)
        self._cell = float(domain.cell_length)
        self._extrema: RangeExtrema | None = None

    def antiderivative(self, positions: np.ndarray, resolution: int) -> np.ndarray:
        """Integral from the domain's left end to each unit position."""
        cells = positions // resolution
        remainder = positions - cells * resolution
        partial = self._padded[cells] * (remainder / resolution)
        return (self._prefix[cells] + partial) * self._cell

    def integrate(self, batch: IntervalBatch) -> np.ndarray:
        r = batch.resolution
        starts = batch.starts
        ends = starts + batch.lengths
        if not self.domain.is_torus:
            return self.antiderivative(ends, r) - self.antiderivative(starts, r)
        total = batch.total_units
        wrap = ends > total
        result = self.antiderivative(np.minimum(ends, total), r) - self.antiderivative(
            starts, r
        )
        if np.any(wrap):
            result[wrap] += self.antiderivative(ends[wrap] - total, r)
        return result

    def averages(self, batch: IntervalBatch) -> np.ndarray:
        return self.integrate(batch) / batch.measures

    def extrema(self, batch: IntervalBatch) -> tuple[np.ndarray, np.ndarray]:
        """Min and max of the cell values touched by each interval."""
        if self._extrema is None:
            table = (
                np.concatenate([self.values, self.values])
                if self.domain.is_torus
                else self.values
            )
            self._extrema = RangeExtrema(table)
        r = batch.resolution
        lo = batch.starts // r
        hi = -((-(batch.starts + batch.lengths)) // r)
        return self._extrema.query(lo, hi)

    def refined(self, resolution: int) -> np.ndarray:
        refined = np.repeat(self.values, resolution)
        if self.domain.is_torus:
            refined = np.concatenate([refined, refined])
        return refined

    def oscillation(
        self, batch: IntervalBatch, centers: np.ndarray, p: float = 1.0
    ) -> np.ndarray:
        """∫_I |f - c_I|^p for every interval I of the batch."""
        refined = self.refined(batch.resolution)
        unit = float(batch.unit)
        out = np.empty(len(batch))
        for length in np.unique(batch.lengths):
            sel = np.flatnonzero(batch.lengths == length)
            windows = refined[batch.starts[sel, None] + np.arange(length)]
            deviation = np.abs(windows - centers[sel, None])
            if p != 1.0:
                deviation = deviation**p
            out[sel] = deviation.sum(axis=1) * unit
        return out


def family_max_at_centers(batch: IntervalBatch, values: np.ndarray) -> np.ndarray:
    """For every mesh cell, the max of `values` over intervals containing the cell's center.

    Cells contained in no interval of the batch get -inf.
    """
    domain = batch.domain
    r = batch.resolution
    n = domain.n_cells
    total2 = 2 * batch.total_units
    centers2 = 2 * r * np.arange(n, dtype=np.int64) + r
    best = np.full(n, -np.inf)
    for length in np.unique(batch.lengths):
        sel = np.flatnonzero(batch.lengths == length)
        offset = centers2[:, None] - 2 * batch.starts[None, sel]
        if domain.is_torus:
            offset %= total2
        inside = (offset >= 0) & (offset < 2 * length)
        candidate = np.where(inside, values[None, sel], -np.inf).max(axis=1)
        best = np.maximum(best, candidate)
    return best


def overlap_matrix(batch: IntervalBatch) -> np.ndarray:
    """Overlap length of every interval (rows) with every mesh cell (columns)."""
    r = batch.resolution
    n = batch.domain.n_cells
    cell_lo = r * np.arange(n, dtype=np.int64)
    cell_hi = cell_lo + r
    starts = batch.starts[:, None]
    ends = starts + batch.lengths[:, None]
    units = np.clip(np.minimum(ends, cell_hi) - np.maximum(starts, cell_lo), 0, None)
    if batch.domain.is_torus:
        total = batch.total_units
        wrapped = np.minimum(ends - total, cell_hi) - np.maximum(starts - total, cell_lo)
        units = units + np.clip(wrapped, 0, None)
    return units * float(batch.unit)


def center_containment(batch: IntervalBatch) -> np.ndarray:
    """Boolean matrix (cells x intervals): the cell's center lies in the interval."""
    r = batch.resolution
    n = batch.domain.n_cells
    centers2 = 2 * r * np.arange(n, dtype=np.int64) + r
    offset = centers2[:, None] - 2 * batch.starts[None, :]
    if batch.domain.is_torus:
        offset %= 2 * batch.total_units
    return (offset >= 0) & (offset < 2 * batch.lengths[None, :])


def _single_batch(domain: Domain, q: ArbitraryInterval) -> IntervalBatch:
    if q.domain != domain:
        raise DomainError(f"Interval on {q.domain} used with data on {domain}")
    return batch_of(domain, [q], 1)


def average(f: MeshFunction1D, q: ArbitraryInterval) -> float:
    """Mean of f over a mesh-aligned interval.

    Raises:
        ResolutionError: If q is not mesh-aligned.
        DomainError: If q leaves the line window.
    """
    batch = _single_batch(f.domain, q)
    return float(MeshIntegrator(f.domain, f.values).averages(batch)[0])


def weight_measure(w: MeshWeight1D, q: ArbitraryInterval) -> float:
    """ω(Q) = ∫_Q ω for a mesh-aligned interval."""
    batch = _single_batch(w.domain, q)
    return float(MeshIntegrator(w.domain, w.values).integrate(batch)[0])


def interval_measure(w: MeshWeight1D, interval: IntervalId | ArbitraryInterval) -> float:
    """ω(I) for any interval whose endpoints the grid resolution reaches."""
    grids = [interval.grid] if isinstance(interval, IntervalId) else []
    resolution = resolution_for(grids)
    batch = batch_of(w.domain, [interval], resolution)
    return float(MeshIntegrator(w.domain, w.values).integrate(batch)[0])


def comparable_averages_check(
    w: MeshWeight1D,
    delta: Fraction | str,
    q: ArbitraryInterval,
    cdy: float | None = None,
) -> VerificationReport:
    """Two-sided comparison of ω-averages over Q and its cover I.

    Checks C_dy^(-log2(4C))·avg_I ω <= avg_Q ω <= C·avg_I ω with the dyadic
    doubling constant C_dy measured on both grids when not supplied.
    """
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    found = cover(q, delta)
    check_level(found.interval.grid, found.interval.level)
    if cdy is None:
        from dyadic_grids.weights import measured_cdy

        cdy = measured_cdy(w, delta)
    avg_q = weight_measure(w, q) / float(q.length)
    avg_i = interval_measure(w, found.interval) / float(found.interval.length)
    ratio = avg_q / avg_i
    upper = float(constant)
    lower = cdy ** (-comparability_exponent(constant))
    passed = within(ratio, upper) and within(lower, ratio)
    log.debug("comparable averages Q=%s I=%s ratio=%.6g", q, found.interval, ratio)
    return VerificationReport(
        name="comparable_averages",
        passed=passed,
        measured=ratio,
        bound=upper,
        delta=delta,
        witness={"Q": q, "I": found.interval},
        details={"avg_Q": avg_q, "avg_I": avg_i, "lower": lower, "cdy": cdy},
    )


def descendant_sums(
    parent: IntervalBatch, child: IntervalBatch, values: np.ndarray
) -> np.ndarray:
    """For every parent interval, the sum of `values` over child intervals inside it.

    Both batches must share domain and resolution, and each must have a
    single interval length (grid level batches do).
    """
    if parent.resolution != child.resolution or parent.domain != child.domain:
        raise ResolutionError("Descendant sums need batches at one resolution")
    if len(child) == 0 or len(parent) == 0:
        return np.zeros(len(parent))
    order = np.argsort(child.starts, kind="stable")
    starts = child.starts[order]
    prefix = np.concatenate([[0.0], np.cumsum(np.asarray(values, dtype=np.float64)[order])])
    lo = parent.starts
    hi = parent.starts + parent.lengths - int(child.lengths[0])

    def before(x: np.ndarray) -> np.ndarray:
        return np.searchsorted(starts, x, side="left")

    def through(x: np.ndarray) -> np.ndarray:
        return np.searchsorted(starts, x, side="right")

    total = child.total_units
    if parent.domain.is_torus:
        capped = np.minimum(hi, total - 1)
        sums = prefix[through(capped)] - prefix[before(lo)]
        wrap = hi >= total
        if np.any(wrap):
            sums[wrap] += prefix[through(hi[wrap] - total)]
    else:
        sums = prefix[through(hi)] - prefix[before(lo)]
    return np.where(hi >= lo, sums, 0.0)


@dataclass(frozen=True)
class ContinuousFamily:
    """Stand-in for "all intervals": every mesh-aligned interval plus the listed grids.

    With `cover_delta` set on the line, aligned intervals whose cover by
    {D, D^δ} leaves the window are dropped, so every member has its cover
    among the grid intervals of the window.
    """

    grids: tuple[GridSpec, ...] = ()
    cover_delta: Fraction | None = None

    @classmethod
    def for_delta(cls, domain: Domain, delta: Fraction | str) -> "ContinuousFamily":
        delta = parse_rational(delta)
        return cls((GridSpec.standard(domain), GridSpec.shifted(domain, delta)), delta)

    @property
    def label(self) -> str:
        return "continuous"


IntervalFamily = ContinuousFamily | GridSpec


def _cover_resident_mask(domain: Domain, delta: Fraction) -> np.ndarray:
    masks = []
    for batch in cover_aligned(domain, delta):
        total = domain.n_cells * batch.per_cell
        masks.append(
            (batch.family >= 0)
            & (batch.cover_left >= 0)
            & (batch.cover_left + batch.cover_span <= total)
        )
    return np.concatenate(masks)


def family_batches(domain: Domain, family: IntervalFamily) -> list[IntervalBatch]:
    """Interval batches of a family, each at the resolution its grid needs."""
    if isinstance(family, GridSpec):
        grids: tuple[GridSpec, ...] = (family,)
    else:
        grids = family.grids
    for grid in grids:
        if grid.domain != domain:
            raise DomainError(f"Grid {grid.label} lives on {grid.domain}, data on {domain}")
    batches = []
    if isinstance(family, ContinuousFamily):
        aligned = aligned_batch(domain)
        if family.cover_delta is not None and not domain.is_torus:
            aligned = aligned.select(_cover_resident_mask(domain, family.cover_delta))
        batches.append(aligned)
    for grid in grids:
        batches.extend(grid_batches(grid, resolution_for([grid])))
    return [batch for batch in batches if len(batch)]
