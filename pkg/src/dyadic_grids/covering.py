#!/usr/bin/env python3
"""
Covering lemmas for the pair of grids {D, D^δ}.

`cover` finds a grid interval containing an arbitrary interval Q with
|I| <= (2/d(δ))|Q|, `inner` a grid interval inside Q, `two_dyadic_cover`
two adjacent standard intervals covering K, and `cover_naive` shows the
failure of the plain translate at large scales.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from dyadic_grids.errors import DomainError, ResolutionError
from dyadic_grids.exact import (
    covering_constant,
    floor_log2,
    format_rational,
    parse_rational,
    reduce_mod1,
    relative_distance,
)
from dyadic_grids.grids import Domain, GridSpec, IntervalId, locate, min_separation
from dyadic_grids.verification import VerificationReport

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ArbitraryInterval:
    """Half-open interval [left, left + length); on the torus an arc that may wrap."""

    left: Fraction
    length: Fraction
    domain: Domain

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise DomainError(f"Interval length must be positive, got {self.length}")
        if self.domain.is_torus:
            if self.length > 1:
                raise DomainError(f"Torus arcs have length <= 1, got {self.length}")
            object.__setattr__(self, "left", reduce_mod1(self.left))

    @classmethod
    def of(
        cls, left: Fraction | str | int, length: Fraction | str | int, domain: Domain
    ) -> "ArbitraryInterval":
        return cls(parse_rational(left), parse_rational(length), domain)

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    def contains(self, left: Fraction, length: Fraction) -> bool:
        """True if [left, left + length) lies inside this interval."""
        return interval_contains(
            self.left, self.length, left, length, self.domain.is_torus
        )

    def to_json(self) -> dict[str, Any]:
        return {"left": format_rational(self.left), "length": format_rational(self.length)}

    def __str__(self) -> str:
        return f"[{format_rational(self.left)}, +{format_rational(self.length)})"


def interval_contains(
    outer_left: Fraction,
    outer_length: Fraction,
    inner_left: Fraction,
    inner_length: Fraction,
    torus: bool,
) -> bool:
    if torus:
        if outer_length >= 1:
            return True
        return reduce_mod1(inner_left - outer_left) + inner_length <= outer_length
    return outer_left <= inner_left and inner_left + inner_length <= outer_left + outer_length


@dataclass(frozen=True)
class CoverResult:
    interval: IntervalId
    ratio: Fraction

    def to_json(self) -> dict[str, Any]:
        return {"interval": self.interval.to_json(), "ratio": format_rational(self.ratio)}


def _grid_pair(domain: Domain, delta: Fraction) -> tuple[GridSpec, GridSpec]:
    return GridSpec.standard(domain), GridSpec.shifted(domain, delta)


def _hits_interior(grid: GridSpec, n: int, left: Fraction, length: Fraction) -> bool:
    """True if a level-n endpoint of the grid lies strictly inside (left, left + length)."""
    spacing = Fraction(2) ** (-n)
    offset = grid.offset(n)
    first_after = offset + (math.floor((left - offset) / spacing) + 1) * spacing
    return first_after < left + length


def cover(q: ArbitraryInterval, delta: Fraction | str) -> CoverResult:
    """Grid interval I in D or D^δ with Q ⊆ I and |I| <= (2/d(δ))|Q|.

    The level n satisfies d·2^(-n-1) <= |Q| < d·2^(-n), where Q contains at
    most one endpoint of the union, so it misses one of the endpoint sets.
    The standard grid wins ties.

    Raises:
        DomainError: If δ is a dyadic rational.
    """
    delta = parse_rational(delta)
    d = relative_distance(delta)
    if d == 0:
        raise DomainError(f"delta={format_rational(delta)} has d(delta)=0")
    domain = q.domain
    standard, shifted = _grid_pair(domain, delta)
    whole = IntervalId(standard, 0, 0)

    if domain.is_torus and q.length >= d:
        return CoverResult(whole, 1 / q.length)

    n = -floor_log2(q.length / d) - 1
    while True:
        for grid in (standard, shifted):
            if not _hits_interior(grid, n, q.left, q.length):
                found = locate(grid, n, q.left, check_domain=False)
                return CoverResult(found, found.length / q.length)
        log.warning(
            "Interval %s meets both endpoint sets at level %d, trying level %d",
            q,
            n,
            n - 1,
        )
        n -= 1
        if domain.is_torus and n < 0:
            return CoverResult(whole, 1 / q.length)


def inner(q: ArbitraryInterval, delta: Fraction | str) -> CoverResult:
    """Largest grid interval I' in D or D^δ with I' ⊆ Q, coarsest level first.

    Any interval of length 2^-n with 2·2^-n <= |Q| fits inside Q, so the
    ratio |I'|/|Q| always exceeds 1/4 >= d(δ)/4.

    Raises:
        ResolutionError: If no grid interval of length >= 2^-L fits.
    """
    delta = parse_rational(delta)
    domain = q.domain
    standard, shifted = _grid_pair(domain, delta)
    if domain.is_torus and q.length == 1:
        return CoverResult(IntervalId(standard, 0, 0), Fraction(1))

    n_first = -floor_log2(q.length)
    if domain.is_torus:
        n_first = max(n_first, 0)
    for n in range(n_first, domain.finest_level + 1):
        spacing = Fraction(2) ** (-n)
        for grid in (standard, shifted):
            offset = grid.offset(n)
            first_left = offset + math.ceil((q.left - offset) / spacing) * spacing
            if first_left + spacing <= q.right:
                found = locate(grid, n, first_left, check_domain=False)
                return CoverResult(found, spacing / q.length)
    raise ResolutionError(
        f"No grid interval of length >= 2^-{domain.finest_level} fits inside {q}"
    )


def two_dyadic_cover(k: ArbitraryInterval) -> tuple[IntervalId, IntervalId]:
    """Adjacent standard intervals J1, J2 of equal length with K ⊆ J1 ∪ J2.

    The common length 2^N satisfies 2^(N-1) < |K| <= 2^N.

    Raises:
        DomainError: On the torus.
    """
    if k.domain.is_torus:
        raise DomainError("two_dyadic_cover works on the line")
    standard = GridSpec.standard(k.domain)
    # level -N with N = ceil(log2 |K|)
    level = floor_log2(1 / k.length)
    first = locate(standard, level, k.left, check_domain=False)
    return first, IntervalId(standard, level, first.index + 1)


def cover_naive(
    q: ArbitraryInterval, delta: Fraction | str, max_level_drop: int
) -> CoverResult | None:
    """Smallest interval of D or the naive translate containing Q, or None.

    Levels are searched from the finest with 2^-n >= |Q| down to
    -max_level_drop. Intervals with 0 and δ in their interior are never
    covered: 0 is an endpoint at every standard level <= 0 and δ at every
    naive level.
    """
    delta = parse_rational(delta)
    standard = GridSpec.standard(q.domain)
    naive = GridSpec.naive(q.domain, delta)
    n_first = floor_log2(1 / q.length)
    for n in range(n_first, -max_level_drop - 1, -1):
        for grid in (standard, naive):
            found = locate(grid, n, q.left, check_domain=False)
            if q.right <= found.left + found.length:
                return CoverResult(found, found.length / q.length)
    return None


@dataclass(frozen=True)
class AlignedCoverBatch:
    """Covers of all mesh-aligned intervals of one length, in exact integer units.

    Positions are measured from the domain's left end in units of
    1/(q·2^L) for δ = p/q. `family` is 0 (standard), 1 (shifted) or -1 when
    both endpoint sets meet the interval.
    """

    length_cells: int
    starts: np.ndarray
    level: int
    family: np.ndarray
    cover_left: np.ndarray
    cover_span: int
    unit: Fraction
    per_cell: int
    ratio: Fraction
    whole_domain: bool

    @property
    def contained(self) -> np.ndarray:
        """Q ⊆ I for every interval of the batch, checked in integer units."""
        if self.whole_domain:
            return np.ones(self.starts.shape, dtype=bool)
        a = self.starts * self.per_cell
        b = a + self.length_cells * self.per_cell
        return (self.cover_left <= a) & (b <= self.cover_left + self.cover_span)


def cover_aligned(domain: Domain, delta: Fraction | str) -> Iterator[AlignedCoverBatch]:
    """Cover every mesh-aligned interval of the domain, one batch per length.

    Vectorized version of `cover` for exhaustive checks: the level depends
    only on the length, endpoints are integers in units of 1/(q·2^L).
    """
    delta = parse_rational(delta)
    d = relative_distance(delta)
    if d == 0:
        raise DomainError(f"delta={format_rational(delta)} has d(delta)=0")
    standard, shifted = _grid_pair(domain, delta)
    q = delta.denominator
    while q % 2 == 0:
        q //= 2
    scale = q * 2**domain.finest_level
    unit = Fraction(1, scale)
    n_cells = domain.n_cells

    for length in range(1, n_cells + 1):
        if domain.is_torus:
            starts = np.arange(n_cells if length < n_cells else 1, dtype=np.int64)
        else:
            starts = np.arange(n_cells - length + 1, dtype=np.int64)
        q_length = Fraction(length, 2**domain.finest_level)

        if domain.is_torus and q_length >= d:
            yield AlignedCoverBatch(
                length_cells=length,
                starts=starts,
                level=0,
                family=np.zeros(starts.shape, dtype=np.int8),
                cover_left=np.zeros(starts.shape, dtype=np.int64),
                cover_span=scale,
                unit=unit,
                per_cell=q,
                ratio=1 / q_length,
                whole_domain=True,
            )
            continue

        n = -floor_log2(q_length / d) - 1
        span = int(Fraction(2) ** (-n) * scale)
        a = starts * q
        b = a + length * q
        family = np.full(starts.shape, -1, dtype=np.int8)
        cover_left = np.zeros(starts.shape, dtype=np.int64)
        for code, grid in ((1, shifted), (0, standard)):
            offset = (grid.offset(n) - domain.left) * scale
            if offset.denominator != 1:
                raise ResolutionError(f"Offset of {grid.label} not on the unit lattice")
            off = int(offset)
            cell_floor = (a - off) // span
            hit = off + (cell_floor + 1) * span < b
            miss = ~hit
            # standard is written last so it wins ties
            family[miss] = code
            cover_left[miss] = off + cell_floor[miss] * span
        both = int(np.count_nonzero(family < 0))
        if both:
            log.warning(
                "%d intervals of length %s meet both endpoint sets at level %d",
                both,
                format_rational(q_length),
                n,
            )
        yield AlignedCoverBatch(
            length_cells=length,
            starts=starts,
            level=n,
            family=family,
            cover_left=cover_left,
            cover_span=span,
            unit=unit,
            per_cell=q,
            ratio=Fraction(span, length * q),
            whole_domain=False,
        )


def verify_cover_soundness(domain: Domain, delta: Fraction | str) -> VerificationReport:
    """Q ⊆ cover(Q, δ) and |I| <= C(δ)|Q| for every mesh-aligned interval Q.

    Intervals meeting both endpoint sets at the first level are re-covered
    with the scalar `cover`, which falls back to coarser levels.
    """
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    checks = 0
    worst = Fraction(0)
    witness: dict[str, Any] = {}
    fallbacks = 0
    for batch in cover_aligned(domain, delta):
        checks += len(batch.starts)
        resolved = batch.family >= 0
        bad = resolved & ~batch.contained
        ratio = batch.ratio
        if np.any(bad) and not witness:
            start = int(batch.starts[np.flatnonzero(bad)[0]])
            witness = {"cells": [start, batch.length_cells], "reason": "not contained"}
        for start in batch.starts[~resolved].tolist():
            fallbacks += 1
            q = ArbitraryInterval(
                domain.left + start * domain.cell_length,
                batch.length_cells * domain.cell_length,
                domain,
            )
            found = cover(q, delta)
            if not interval_contains(
                found.interval.left, found.interval.length, q.left, q.length, domain.is_torus
            ):
                witness = witness or {"interval": q, "reason": "fallback not contained"}
            ratio = max(ratio, found.ratio)
        if ratio > worst:
            worst = ratio
        if ratio > constant and not witness:
            witness = {"length_cells": batch.length_cells, "ratio": ratio}
    return VerificationReport(
        name="cover_soundness",
        passed=not witness,
        measured=float(worst),
        bound=float(constant),
        delta=delta,
        checks=checks,
        witness=witness,
        details={"domain": str(domain), "fallbacks": fallbacks, "max_ratio": worst},
    ).logged()


def verify_separation(delta: Fraction | str, levels: range) -> VerificationReport:
    """min gap of A_n ∪ A_n^δ >= d(δ)·2^-n at every level, exact.

    `measured` is max over n of d(δ)·2^-n / gap, so the bound is 1.
    """
    delta = parse_rational(delta)
    d = relative_distance(delta)
    if d == 0:
        raise DomainError(f"delta={format_rational(delta)} has d(delta)=0")
    domain = Domain.line(max(0, -levels.start), max(1, levels.stop - 1))
    grids = _grid_pair(domain, delta)
    worst = Fraction(0)
    witness: dict[str, Any] = {}
    tight = []
    for n in levels:
        gap = min_separation(grids, n)
        ratio = d * Fraction(2) ** (-n) / gap
        if ratio == 1:
            tight.append(n)
        if ratio > worst:
            worst = ratio
        if ratio > 1 and not witness:
            witness = {"n": n, "gap": gap}
    return VerificationReport(
        name="separation",
        passed=worst <= 1,
        measured=float(worst),
        bound=1.0,
        delta=delta,
        checks=len(levels),
        witness=witness,
        details={"levels": [levels.start, levels.stop - 1], "tight_levels": tight},
    ).logged()


def verify_shift_necessity(
    delta: Fraction | str, window_level: int, finest_level: int = 1
) -> VerificationReport:
    """Large-scale shifts are needed for coverings on the line.

    Every mesh-aligned Q in the window with 0 and δ interior and |Q| <= 2^M
    is covered by {D, D^δ} within C(δ), while D and the plain translate
    D + δ never cover it at levels down to -M.
    """
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    domain = Domain.line(window_level, finest_level)
    cell = domain.cell_length
    cap = Fraction(2) ** window_level
    checks = 0
    worst = Fraction(0)
    witness: dict[str, Any] = {}
    naive_hits = 0
    for i in range(domain.n_cells):
        left = domain.left + i * cell
        if left >= 0:
            break
        j_first = math.floor((delta - domain.left) / cell) + 1
        for j in range(j_first, domain.n_cells + 1):
            length = (j - i) * cell
            if length > cap:
                break
            q = ArbitraryInterval(left, length, domain)
            checks += 1
            found = cover(q, delta)
            worst = max(worst, found.ratio)
            if found.ratio > constant and not witness:
                witness = {"interval": q, "ratio": found.ratio}
            if cover_naive(q, delta, window_level) is not None:
                naive_hits += 1
                witness = witness or {"interval": q, "reason": "naive translate covers"}
    return VerificationReport(
        name="shift_necessity",
        passed=not witness,
        measured=float(worst),
        bound=float(constant),
        delta=delta,
        checks=checks,
        witness=witness,
        details={"window_level": window_level, "naive_covers": naive_hits},
    ).logged()
