#!/usr/bin/env python3
"""Tests for the covering lemmas and their exhaustive verifiers."""

from fractions import Fraction

import numpy as np
import pytest

from dyadic_grids.covering import (
    ArbitraryInterval,
    cover,
    cover_aligned,
    cover_naive,
    inner,
    interval_contains,
    two_dyadic_cover,
    verify_cover_soundness,
    verify_separation,
    verify_shift_necessity,
)
from dyadic_grids.errors import DomainError, ResolutionError
from dyadic_grids.exact import covering_constant
from dyadic_grids.grids import Domain, GridFamily


def random_interval(rng: np.random.Generator, domain: Domain, denominator: int = 97) -> ArbitraryInterval:
    """Random rational interval with endpoints on a 1/denominator lattice."""
    span = int(domain.length * denominator)
    length = Fraction(int(rng.integers(4, span // 2)), denominator)
    left = domain.left + Fraction(int(rng.integers(0, span)), denominator)
    if not domain.is_torus:
        left = min(left, domain.right - length)
    return ArbitraryInterval(left, length, domain)


class TestArbitraryInterval:
    """Test interval construction and containment."""

    def test_torus_arcs_wrap(self):
        q = ArbitraryInterval.of("7/4", "1/2", Domain.torus(3))
        assert q.left == Fraction(3, 4)
        assert q.contains(Fraction(7, 8), Fraction(1, 4))
        assert q.contains(Fraction(0), Fraction(1, 4))
        assert not q.contains(Fraction(1, 8), Fraction(1, 4))

    def test_validation(self):
        with pytest.raises(DomainError, match="positive"):
            ArbitraryInterval.of("0", "0", Domain.torus(3))
        with pytest.raises(DomainError, match="length <= 1"):
            ArbitraryInterval.of("0", "3/2", Domain.torus(3))

    def test_line_containment(self):
        assert interval_contains(Fraction(0), Fraction(1), Fraction(1, 4), Fraction(3, 4), False)
        assert not interval_contains(Fraction(0), Fraction(1), Fraction(1, 4), Fraction(1), False)


class TestCover:
    """Test cover() and inner()."""

    def test_cover_examples(self):
        torus = Domain.torus(3)
        for left in ("2/5", "3/10"):
            found = cover(ArbitraryInterval.of(left, "1/10", torus), "1/3")
            assert found.interval.grid.family is GridFamily.STANDARD
            assert (found.interval.level, found.interval.left) == (1, 0)
            assert found.ratio == 5

    def test_cover_long_arc_is_whole_circle(self):
        found = cover(ArbitraryInterval.of("1/2", "1/2", Domain.torus(3)), "1/3")
        assert found.interval.level == 0
        assert found.ratio == 2

    def test_cover_rejects_dyadic_delta(self):
        with pytest.raises(DomainError, match="d\\(delta\\)=0"):
            cover(ArbitraryInterval.of("0", "1/4", Domain.torus(3)), "3/4")

    @pytest.mark.parametrize("delta", ["1/3", "1/5", "2/5", "1/7"])
    @pytest.mark.parametrize("domain", [Domain.torus(6), Domain.line(3, 6)], ids=str)
    def test_cover_fuzzed(self, delta, domain):
        rng = np.random.default_rng(3)
        constant = covering_constant(Fraction(delta))
        for _ in range(200):
            q = random_interval(rng, domain)
            found = cover(q, delta)
            assert interval_contains(
                found.interval.left, found.interval.length, q.left, q.length, domain.is_torus
            )
            assert found.ratio <= constant

    def test_inner_example(self):
        found = inner(ArbitraryInterval.of("2/5", "1/2", Domain.torus(3)), "1/3")
        assert found.interval.grid.family is GridFamily.STANDARD
        assert (found.interval.left, found.interval.length) == (Fraction(1, 2), Fraction(1, 4))
        assert found.ratio == Fraction(1, 2)

    @pytest.mark.parametrize("domain", [Domain.torus(8), Domain.line(2, 8)], ids=str)
    def test_inner_fuzzed(self, domain):
        rng = np.random.default_rng(5)
        for _ in range(200):
            q = random_interval(rng, domain)
            found = inner(q, "1/5")
            assert q.contains(found.interval.left, found.interval.length)
            assert found.ratio > Fraction(1, 4)

    def test_inner_needs_resolution(self):
        with pytest.raises(ResolutionError, match="fits inside"):
            inner(ArbitraryInterval.of("1/16", "1/8", Domain.torus(2)), "1/3")


class TestTwoDyadicCover:
    """Test the adjacent standard pair covering."""

    @pytest.mark.parametrize(
        ("left", "length", "expected"),
        [
            ("3/10", "4/5", [(0, 1), (1, 1)]),
            ("-1/5", "1/2", [(Fraction(-1, 2), Fraction(1, 2)), (0, Fraction(1, 2))]),
            ("1/10", "1/2", [(0, Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2))]),
        ],
    )
    def test_examples(self, left, length, expected):
        k = ArbitraryInterval.of(left, length, Domain.line(2, 4))
        pair = two_dyadic_cover(k)
        assert [(j.left, j.length) for j in pair] == expected
        assert pair[0].right == pair[1].left
        assert pair[0].left <= k.left and k.right <= pair[1].right

    def test_torus_rejected(self):
        with pytest.raises(DomainError, match="line"):
            two_dyadic_cover(ArbitraryInterval.of("0", "1/2", Domain.torus(3)))


class TestCoverNaive:
    """Test the failure of the plain translate."""

    def test_interval_around_zero_and_delta(self):
        q = ArbitraryInterval.of("-1/2", "1", Domain.line(3, 2))
        assert cover_naive(q, "1/3", 3) is None
        assert cover(q, "1/3").ratio <= 6

    def test_small_interval_is_covered(self):
        q = ArbitraryInterval.of("1/2", "1/4", Domain.line(3, 2))
        found = cover_naive(q, "1/3", 3)
        assert found is not None
        assert found.interval.grid.family is GridFamily.STANDARD


class TestVerifiers:
    """Test the exhaustive covering verifiers on small domains."""

    @pytest.mark.parametrize("delta", ["1/3", "1/5"])
    @pytest.mark.parametrize("domain", [Domain.torus(5), Domain.line(1, 3)], ids=str)
    def test_cover_soundness(self, delta, domain):
        report = verify_cover_soundness(domain, delta)
        assert report.passed, report.witness
        assert report.measured <= float(covering_constant(Fraction(delta)))
        n = domain.n_cells
        if domain.is_torus:
            expected = n * (n - 1) + 1
        else:
            expected = n * (n + 1) // 2
        assert report.checks == expected

    def test_aligned_batches_match_scalar_cover(self):
        domain = Domain.torus(4)
        for batch in cover_aligned(domain, "1/3"):
            if batch.whole_domain:
                continue
            for start, family in zip(batch.starts.tolist(), batch.family.tolist()):
                if family < 0:
                    continue
                q = ArbitraryInterval(
                    start * domain.cell_length, batch.length_cells * domain.cell_length, domain
                )
                found = cover(q, "1/3")
                assert found.interval.level == batch.level
                assert found.ratio == batch.ratio

    def test_separation(self):
        report = verify_separation("1/3", range(-6, 7))
        assert report.passed
        assert report.measured == 1.0
        assert report.details["tight_levels"] == list(range(-6, 7))

    @pytest.mark.parametrize("delta", ["2/5", "1/7"])
    def test_separation_other_deltas(self, delta):
        assert verify_separation(delta, range(-8, 9)).passed

    def test_shift_necessity(self):
        report = verify_shift_necessity("1/3", window_level=2, finest_level=1)
        assert report.passed, report.witness
        assert report.checks > 0
        assert report.details["naive_covers"] == 0
