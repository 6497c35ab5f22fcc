#!/usr/bin/env python3
"""Tests for domains, grid families and interval identifiers."""

from fractions import Fraction

import pytest

from dyadic_grids.errors import DomainError
from dyadic_grids.exact import relative_distance
from dyadic_grids.grids import (
    Domain,
    GridSpec,
    IntervalId,
    endpoint_sets,
    interval,
    level_shift,
    locate,
    min_separation,
)

DELTAS = [Fraction(1, 3), Fraction(1, 5), Fraction(2, 5), Fraction(1, 7)]


class TestDomain:
    """Test domain geometry."""

    def test_torus(self):
        domain = Domain.torus(3)
        assert domain.n_cells == 8
        assert domain.left == 0
        assert domain.length == 1
        assert domain.coarsest_level == 0
        assert list(domain.levels()) == [0, 1, 2, 3]

    def test_line(self):
        domain = Domain.line(2, 1)
        assert domain.n_cells == 16
        assert domain.left == -4
        assert domain.right == 4
        assert domain.cell_length == Fraction(1, 2)
        assert domain.coarsest_level == -2
        assert domain.contains(Fraction(-4))
        assert not domain.contains(Fraction(4))

    def test_validation(self):
        with pytest.raises(DomainError, match="Finest level"):
            Domain.torus(0)
        with pytest.raises(DomainError, match="Window level"):
            Domain.line(-1, 3)

    def test_json(self):
        for domain in (Domain.torus(4), Domain.line(3, 2)):
            assert Domain.from_json(domain.to_json()) == domain
        with pytest.raises(DomainError, match="Invalid domain"):
            Domain.from_json({"kind": "sphere", "L": 2})


class TestGridSpec:
    """Test grid families and level shifts."""

    @pytest.mark.parametrize(("n", "expected"), [(-1, 1), (-2, 1), (-3, 5), (-4, 5), (-6, 21), (3, 0)])
    def test_level_shift(self, n, expected):
        assert level_shift(n) == expected

    def test_dyadic_delta_rejected(self):
        with pytest.raises(DomainError, match="dyadic rational"):
            GridSpec.shifted(Domain.torus(3), "1/2")
        with pytest.raises(DomainError, match="no delta"):
            GridSpec(GridSpec.standard(Domain.torus(3)).family, Domain.torus(3), Fraction(1, 3))

    def test_offsets(self):
        domain = Domain.line(4, 2)
        shifted = GridSpec.shifted(domain, "1/3")
        naive = GridSpec.naive(domain, "1/3")
        assert shifted.offset(2) == Fraction(1, 3)
        assert shifted.offset(-2) == Fraction(4, 3)
        assert shifted.offset(-4) == Fraction(16, 3)
        assert naive.offset(-4) == Fraction(1, 3)
        assert GridSpec.standard(domain).offset(-4) == 0


class TestIntervals:
    """Test interval(), locate() and the tree structure."""

    def test_interval_examples(self):
        torus = Domain.torus(3)
        left, length = interval(IntervalId(GridSpec.standard(torus), 1, 1))
        assert (left, length.to_fraction()) == (Fraction(1, 2), Fraction(1, 2))

        line = Domain.line(2, 2)
        left, length = interval(IntervalId(GridSpec.shifted(line, "1/3"), -2, 0))
        assert (left, length.to_fraction()) == (Fraction(4, 3), 4)
        left, length = interval(IntervalId(GridSpec.naive(line, "1/3"), -2, 0))
        assert (left, length.to_fraction()) == (Fraction(1, 3), 4)

    def test_interval_level_out_of_range(self):
        with pytest.raises(DomainError, match="Level"):
            interval(IntervalId(GridSpec.standard(Domain.torus(3)), 4, 0))

    def test_locate_examples(self):
        torus = Domain.torus(3)
        found = locate(GridSpec.standard(torus), 2, Fraction(3, 10))
        assert (found.index, found.left) == (1, Fraction(1, 4))

        wrapped = locate(GridSpec.shifted(torus, "1/3"), 1, Fraction(1, 10))
        assert wrapped.left == Fraction(5, 6)
        assert wrapped.contains_point(Fraction(1, 10))

        line = Domain.line(2, 2)
        found = locate(GridSpec.shifted(line, "1/3"), -2, Fraction(0))
        assert found.index == -1
        assert found.left == Fraction(4, 3) - 4

    def test_locate_outside_window(self):
        with pytest.raises(DomainError, match="outside"):
            locate(GridSpec.standard(Domain.line(1, 2)), 0, Fraction(2))

    def test_children_nest_in_parent(self):
        grid = GridSpec.shifted(Domain.line(3, 3), "1/3")
        for level in range(-2, 3):
            parent = locate(grid, level, Fraction(1, 7))
            left, right = parent.children()
            assert left.left == parent.left
            assert right.left == parent.left + parent.length / 2
            assert left.parent() == parent
            assert right.parent() == parent


class TestEndpointSets:
    """Test endpoint sets and their separation."""

    def test_examples(self):
        torus = Domain.torus(3)
        grids = (GridSpec.standard(torus), GridSpec.shifted(torus, "1/3"))
        standard, shifted = endpoint_sets(grids, 1)
        assert standard == [0, Fraction(1, 2)]
        assert shifted == [Fraction(1, 3), Fraction(5, 6)]

        line = Domain.line(2, 2)
        grids = (GridSpec.standard(line), GridSpec.shifted(line, "1/3"))
        _, shifted = endpoint_sets(grids, -2)
        assert shifted == [Fraction(4, 3) - 4, Fraction(4, 3)]

    @pytest.mark.parametrize("delta", DELTAS)
    def test_separation_invariant(self, delta):
        domain = Domain.line(10, 10)
        grids = (GridSpec.standard(domain), GridSpec.shifted(domain, delta))
        d = relative_distance(delta)
        for n in range(-10, 11):
            assert min_separation(grids, n) >= d * Fraction(2) ** (-n)

    def test_separation_equality_for_one_third(self):
        domain = Domain.line(10, 10)
        grids = (GridSpec.standard(domain), GridSpec.shifted(domain, "1/3"))
        for n in range(-10, 0, 2):
            assert min_separation(grids, n) == Fraction(1, 3) * Fraction(2) ** (-n)

    def test_separation_matches_enumeration(self):
        domain = Domain.line(3, 3)
        grids = (GridSpec.standard(domain), GridSpec.shifted(domain, "2/5"))
        for n in range(-3, 4):
            standard, shifted = endpoint_sets(grids, n)
            points = sorted(set(standard) | set(shifted))
            gaps = [b - a for a, b in zip(points, points[1:])]
            assert min(gaps) >= min_separation(grids, n)
