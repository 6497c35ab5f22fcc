#!/usr/bin/env python3
"""
Exact rational helpers and the δ diagnostics.

All grid geometry in this package is done in `fractions.Fraction`. The two
diagnostics are the relative distance d(δ) of δ to the dyadic rationals and
the covering constant C(δ) = 2/d(δ).

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from dyadic_grids.errors import DomainError

ExactRational = Fraction

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse "p/q" or an integer into a Fraction.

    Decimal and float notation is rejected, rationals are always exact.

    Raises:
        DomainError: If the text is not of the form p/q or p, or q is zero.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    match = _RATIONAL_RE.match(text)
    if match is None:
        raise DomainError(f"Expected a rational of the form p/q, got {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise DomainError(f"Zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction) -> str:
    """Format as "p/q" (or "p" for integers)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def floor_log2(value: Fraction) -> int:
    """Largest integer m with 2^m <= value, exact."""
    if value <= 0:
        raise DomainError(f"floor_log2 needs a positive value, got {value}")
    m = value.numerator.bit_length() - value.denominator.bit_length()
    # 2^m is within a factor two of value, correct the estimate
    while Fraction(2) ** m > value:
        m -= 1
    while Fraction(2) ** (m + 1) <= value:
        m += 1
    return m


def dist_to_integers(value: Fraction) -> Fraction:
    """Distance from value to the nearest integer."""
    frac = value - math.floor(value)
    return min(frac, 1 - frac)


def reduce_mod1(value: Fraction) -> Fraction:
    """Fractional part, in [0, 1)."""
    return value - math.floor(value)


@dataclass(frozen=True)
class DyadicValue:
    """Dyadic rational mantissa·2^-scale in canonical form (odd mantissa or zero)."""

    mantissa: int
    scale: int

    def __post_init__(self) -> None:
        if self.mantissa == 0 and self.scale != 0:
            raise DomainError("Zero must be stored with scale 0")
        if self.mantissa != 0 and self.mantissa % 2 == 0:
            raise DomainError(
                f"Mantissa {self.mantissa} is even, use DyadicValue.of() to normalize"
            )

    @classmethod
    def of(cls, mantissa: int, scale: int) -> "DyadicValue":
        """Build from any mantissa/scale pair, normalizing to canonical form."""
        if mantissa == 0:
            return cls(0, 0)
        while mantissa % 2 == 0:
            mantissa //= 2
            scale -= 1
        return cls(mantissa, scale)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicValue":
        """Convert a Fraction whose denominator is a power of two."""
        denominator = value.denominator
        if denominator & (denominator - 1):
            raise DomainError(f"{value} is not a dyadic rational")
        return cls.of(value.numerator, denominator.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        if self.scale >= 0:
            return Fraction(self.mantissa, 2**self.scale)
        return Fraction(self.mantissa * 2 ** (-self.scale))

    def __str__(self) -> str:
        return format_rational(self.to_fraction())


def relative_distance(delta: Fraction) -> Fraction:
    """Relative distance d(δ) = inf over n >= 0 of dist(2^n·δ, Z).

    The orbit of 2^n·δ mod 1 is eventually periodic for rational δ, so the
    infimum is a minimum over the pre-period plus one period.

    Raises:
        DomainError: If delta is not in (0, 1).
    """
    delta = parse_rational(delta)
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {format_rational(delta)}")

    q = delta.denominator
    state = delta.numerator % q
    seen: set[int] = set()
    best = Fraction(1, 2)
    while state not in seen:
        if state == 0:
            return Fraction(0)
        seen.add(state)
        best = min(best, Fraction(min(state, q - state), q))
        state = (2 * state) % q
    return best


def covering_constant(delta: Fraction) -> Fraction:
    """Covering constant C(δ) = 2/d(δ).

    Raises:
        DomainError: If δ is a dyadic rational (d(δ) = 0).
    """
    d = relative_distance(delta)
    if d == 0:
        raise DomainError(
            f"delta={format_rational(parse_rational(delta))} is a dyadic rational, d(delta)=0"
        )
    return 2 / d


def comparability_exponent(constant: Fraction, factor: int = 4) -> float:
    """log2(factor·C), the chain depth in the comparable-averages argument."""
    return math.log2(factor * float(constant))
