#!/usr/bin/env python3
"""
Standard, shifted and naively shifted dyadic grids on the circle and the line.

Level n intervals have length 2^-n. The shifted grid D^δ places its level-n
intervals at δ + s_n + k·2^-n where s_n is an extra integer translation at
large scales (n < 0) that keeps the family nested; the naive grid uses the
plain translate δ + k·2^-n at every level.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from dyadic_grids.errors import DomainError
from dyadic_grids.exact import (
    DyadicValue,
    dist_to_integers,
    format_rational,
    parse_rational,
    reduce_mod1,
    relative_distance,
)


class DomainKind(str, Enum):
    TORUS = "torus"
    LINE = "line"


@dataclass(frozen=True)
class Domain:
    """Sampled domain: the circle [0,1) or the window [-2^M, 2^M) of the line.

    The finest mesh has cells of length 2^-L in both cases.
    """

    kind: DomainKind
    finest_level: int
    window_level: int = 0

    def __post_init__(self) -> None:
        if self.finest_level < 1:
            raise DomainError(f"Finest level must be >= 1, got {self.finest_level}")
        if self.window_level < 0:
            raise DomainError(f"Window level must be >= 0, got {self.window_level}")
        if self.kind is DomainKind.TORUS and self.window_level != 0:
            raise DomainError("The torus has no window level")

    @classmethod
    def torus(cls, finest_level: int) -> "Domain":
        return cls(DomainKind.TORUS, finest_level)

    @classmethod
    def line(cls, window_level: int, finest_level: int) -> "Domain":
        return cls(DomainKind.LINE, finest_level, window_level)

    @property
    def is_torus(self) -> bool:
        return self.kind is DomainKind.TORUS

    @property
    def n_cells(self) -> int:
        if self.is_torus:
            return 2**self.finest_level
        return 2 ** (self.window_level + self.finest_level + 1)

    @property
    def left(self) -> Fraction:
        return Fraction(0) if self.is_torus else Fraction(-(2**self.window_level))

    @property
    def length(self) -> Fraction:
        return Fraction(1) if self.is_torus else Fraction(2 ** (self.window_level + 1))

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    @property
    def cell_length(self) -> Fraction:
        return Fraction(1, 2**self.finest_level)

    @property
    def coarsest_level(self) -> int:
        return 0 if self.is_torus else -self.window_level

    def levels(self) -> range:
        """Grid levels represented in this domain, coarsest first."""
        return range(self.coarsest_level, self.finest_level + 1)

    def contains(self, x: Fraction) -> bool:
        if self.is_torus:
            return True
        return self.left <= x < self.right

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind.value, "L": self.finest_level}
        if not self.is_torus:
            data["M"] = self.window_level
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Domain":
        try:
            kind = DomainKind(data["kind"])
            return cls(kind, int(data["L"]), int(data.get("M", 0)))
        except (KeyError, ValueError) as exc:
            raise DomainError(f"Invalid domain description {data!r}: {exc}") from exc

    def __str__(self) -> str:
        if self.is_torus:
            return f"torus(L={self.finest_level})"
        return f"line(M={self.window_level}, L={self.finest_level})"


class GridFamily(str, Enum):
    STANDARD = "std"
    SHIFTED = "delta"
    NAIVE = "naive"


def level_shift(n: int) -> Fraction:
    """Extra translation s_n of the shifted grid at level n.

    Zero for n >= 0, otherwise the sum of 4^j for j < ceil(|n|/2), so that
    s_-1 = s_-2 = 1, s_-3 = s_-4 = 5, s_-5 = s_-6 = 21.
    """
    if n >= 0:
        return Fraction(0)
    terms = (-n + 1) // 2
    return Fraction((4**terms - 1) // 3)


@dataclass(frozen=True)
class GridSpec:
    """A grid family on a domain."""

    family: GridFamily
    domain: Domain
    delta: Fraction | None = None

    def __post_init__(self) -> None:
        if self.family is GridFamily.STANDARD:
            if self.delta is not None:
                raise DomainError("The standard grid takes no delta")
            return
        if self.delta is None:
            raise DomainError(f"Grid family {self.family.value} needs a delta")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if relative_distance(self.delta) == 0:
            raise DomainError(
                f"delta={format_rational(self.delta)} is a dyadic rational, d(delta)=0"
            )

    @classmethod
    def standard(cls, domain: Domain) -> "GridSpec":
        return cls(GridFamily.STANDARD, domain)

    @classmethod
    def shifted(cls, domain: Domain, delta: Fraction | str) -> "GridSpec":
        return cls(GridFamily.SHIFTED, domain, parse_rational(delta))

    @classmethod
    def naive(cls, domain: Domain, delta: Fraction | str) -> "GridSpec":
        return cls(GridFamily.NAIVE, domain, parse_rational(delta))

    @property
    def label(self) -> str:
        if self.delta is None:
            return self.family.value
        return f"{self.family.value}({format_rational(self.delta)})"

    def offset(self, n: int) -> Fraction:
        """Left endpoint of the level-n interval with index 0."""
        if self.family is GridFamily.STANDARD:
            return Fraction(0)
        assert self.delta is not None
        if self.family is GridFamily.NAIVE:
            return self.delta
        return self.delta + level_shift(n)

    def to_json(self) -> dict[str, Any]:
        return {
            "grid": self.family.value,
            "delta": format_rational(self.delta) if self.delta is not None else None,
        }


def _spacing(n: int) -> Fraction:
    return Fraction(2) ** (-n)


@dataclass(frozen=True)
class IntervalId:
    """Interval [left, left + 2^-n) with index k at level n of a grid."""

    grid: GridSpec
    level: int
    index: int

    @property
    def length(self) -> Fraction:
        return _spacing(self.level)

    @property
    def left(self) -> Fraction:
        left = self.grid.offset(self.level) + self.index * self.length
        return reduce_mod1(left) if self.grid.domain.is_torus else left

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    def parent(self) -> "IntervalId":
        return locate(self.grid, self.level - 1, self.left, check_domain=False)

    def children(self) -> tuple["IntervalId", "IntervalId"]:
        half = self.length / 2
        return (
            locate(self.grid, self.level + 1, self.left, check_domain=False),
            locate(self.grid, self.level + 1, self.left + half, check_domain=False),
        )

    def contains_point(self, x: Fraction) -> bool:
        if self.grid.domain.is_torus:
            return reduce_mod1(x - self.left) < self.length
        return self.left <= x < self.right

    def to_json(self) -> dict[str, Any]:
        data = self.grid.to_json()
        data.update({"n": self.level, "k": str(self.index)})
        data["left"] = format_rational(self.left)
        data["length"] = format_rational(self.length)
        return data

    def __str__(self) -> str:
        return (
            f"{self.grid.label}[n={self.level}, k={self.index}]"
            f"=[{format_rational(self.left)}, +{format_rational(self.length)})"
        )


def check_level(grid: GridSpec, n: int) -> None:
    domain = grid.domain
    if not domain.coarsest_level <= n <= domain.finest_level:
        raise DomainError(
            f"Level {n} outside [{domain.coarsest_level}, {domain.finest_level}] for {domain}"
        )


def interval(interval_id: IntervalId) -> tuple[Fraction, DyadicValue]:
    """Exact (left, length) of a grid interval; torus lefts are reduced mod 1.

    Raises:
        DomainError: If the level is outside the domain's level range.
    """
    check_level(interval_id.grid, interval_id.level)
    return interval_id.left, DyadicValue.of(1, interval_id.level)


def locate(
    grid: GridSpec, n: int, x: Fraction, check_domain: bool = True
) -> IntervalId:
    """The unique level-n interval of the grid containing x.

    Raises:
        DomainError: If x lies outside the line window or n is out of range
            (only when check_domain is set).
    """
    x = parse_rational(x)
    domain = grid.domain
    if check_domain:
        check_level(grid, n)
        if not domain.contains(x):
            raise DomainError(f"Point {format_rational(x)} outside {domain}")
    k = math.floor((x - grid.offset(n)) * Fraction(2) ** n)
    if domain.is_torus and n >= 0:
        k %= 2**n
    return IntervalId(grid, n, k)


def endpoint_sets(
    grids: tuple[GridSpec, GridSpec], n: int
) -> tuple[list[Fraction], list[Fraction]]:
    """Left endpoints of the level-n intervals of both grids inside the domain."""
    first, second = grids
    if first.domain != second.domain:
        raise DomainError("Endpoint sets need grids on the same domain")
    return _endpoints(first, n), _endpoints(second, n)


def _endpoints(grid: GridSpec, n: int) -> list[Fraction]:
    check_level(grid, n)
    domain = grid.domain
    spacing = _spacing(n)
    offset = grid.offset(n)
    if domain.is_torus:
        return sorted(reduce_mod1(offset + k * spacing) for k in range(2**n))
    k_first = math.ceil((domain.left - offset) / spacing)
    points = []
    k = k_first
    while offset + k * spacing < domain.right:
        points.append(offset + k * spacing)
        k += 1
    return points


def min_separation(grids: tuple[GridSpec, GridSpec], n: int) -> Fraction:
    """Minimum distance between distinct points of the union of level-n endpoint sets.

    Both sets are lattices with spacing 2^-n, so the minimum is attained
    within one period and is computed exactly without enumeration.
    """
    first, second = grids
    spacing = _spacing(n)
    relative = dist_to_integers((second.offset(n) - first.offset(n)) / spacing)
    if relative == 0:
        return spacing
    return min(spacing, relative * spacing)
