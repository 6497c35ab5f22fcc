#!/usr/bin/env python3
"""Tests for the two-parameter rectangle analysis."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from dyadic_grids.covering import ArbitraryInterval
from dyadic_grids.errors import DomainError, ResolutionError
from dyadic_grids.grids import Domain, GridSpec, IntervalId
from dyadic_grids.mesh import MeshFunction2D, MeshWeight1D, MeshWeight2D
from dyadic_grids.product import (
    GridPair,
    MeshRectangle,
    OpenSetApprox,
    check_parseval_2d,
    h1_bmo_pairing,
    haar2_transform,
    product_bmo_dyadic,
    product_cdy,
    product_h1_dyadic_norm,
    product_weight_check,
    strong_maximal,
    verify_product_bmo,
    verify_strong_maximal_comparability,
    verify_weighted,
    vmo_truncation_2d,
    weighted_strong_maximal,
)
from dyadic_grids.tools.generators import (
    generate_weight,
    haar_function,
    power_weight,
    random_function_2d,
    staircase,
    tensor_weight,
)

DOMAINS = (Domain.torus(3), Domain.torus(3))


def product_haar(first: IntervalId, second: IntervalId) -> MeshFunction2D:
    return MeshFunction2D(
        (first.grid.domain, second.grid.domain),
        np.outer(haar_function(first).values, haar_function(second).values),
    )


@pytest.fixture
def noise() -> MeshFunction2D:
    return random_function_2d(np.random.default_rng(6), DOMAINS)


@pytest.fixture
def standard_pair() -> GridPair:
    return GridPair(GridSpec.standard(DOMAINS[0]), GridSpec.standard(DOMAINS[1]))


class TestGeometry:
    """Test grid pairs, rectangles and open sets."""

    def test_all_pairs(self):
        pairs = GridPair.all_pairs(DOMAINS, "1/3")
        assert list(pairs) == ["dd", "dδ", "δd", "δδ"]
        assert pairs["dδ"].delta == Fraction(1, 3)
        assert pairs["dd"].delta is None
        assert pairs["δd"].label == "delta(1/3)xstd"

    def test_pair_validation(self):
        d = DOMAINS[0]
        with pytest.raises(DomainError, match="standard and shifted"):
            GridPair(GridSpec.naive(d, "1/3"), GridSpec.standard(d))
        with pytest.raises(DomainError, match="share one delta"):
            GridPair(GridSpec.shifted(d, "1/3"), GridSpec.shifted(d, "1/5"))

    def test_open_set(self):
        d1, d2 = DOMAINS
        rectangles = (
            MeshRectangle(ArbitraryInterval.of("0", "1/2", d1), ArbitraryInterval.of("0", "1/4", d2)),
            MeshRectangle(ArbitraryInterval.of("1/4", "1/2", d1), ArbitraryInterval.of("1/8", "1/4", d2)),
        )
        omega = OpenSetApprox(DOMAINS, rectangles)
        assert rectangles[0].area == Fraction(1, 8)
        # overlap [1/4, 1/2) x [1/8, 1/4) counted once
        assert omega.measure == Fraction(1, 8) + Fraction(1, 8) - Fraction(1, 32)
        assert omega.mask.shape == (8, 8)
        with pytest.raises(DomainError, match="at least one rectangle"):
            OpenSetApprox(DOMAINS, ())

    def test_staircase(self):
        omega = staircase(np.random.default_rng(1), DOMAINS, steps=3)
        assert 0 < omega.measure <= 1
        assert omega.mask[0, 0]


class TestStrongMaximal:
    """Test strong maximal functions and their comparability."""

    def test_constant(self):
        f = MeshFunction2D.constant(DOMAINS, -2.0)
        assert np.allclose(strong_maximal(f, "1/3").values, 2.0)
        pair = GridPair.all_pairs(DOMAINS, "1/3")["δδ"]
        assert np.allclose(strong_maximal(f, pair).values, 2.0)

    def test_spike_on_standard_pair(self, standard_pair):
        values = np.zeros((8, 8))
        values[0, 0] = 1.0
        m = strong_maximal(MeshFunction2D(DOMAINS, values), standard_pair).values
        assert m[0, 0] == pytest.approx(1.0)
        assert m[1, 1] == pytest.approx(0.25)
        assert m[7, 7] == pytest.approx(1 / 64)

    @pytest.mark.parametrize("kind", ["noise", "blocks"])
    def test_comparability(self, kind):
        f = random_function_2d(np.random.default_rng(2), DOMAINS, kind)
        report = verify_strong_maximal_comparability(f, "1/3")
        assert report.passed, report.details
        assert report.details["subset"]
        assert report.details["sum_at_most_4M"]
        assert report.bound == pytest.approx(36.0)

    def test_weighted(self, noise):
        u = generate_weight("cascade", DOMAINS[0], seed=1, ratio_bound=2.0)
        v = generate_weight("step", DOMAINS[1], seed=2)
        w = tensor_weight(u, v)
        report = verify_weighted(noise, w, "1/3")
        assert report.passed, report.details
        assert report.details["cdy"] == pytest.approx(product_cdy(w, "1/3"))

    def test_weighted_maximal_of_constant_weight(self, noise):
        w = MeshWeight2D.constant(DOMAINS, 5.0)
        for family in ("1/3", GridPair.all_pairs(DOMAINS, "1/3")["δd"]):
            weighted = weighted_strong_maximal(noise, w, family).values
            assert np.allclose(weighted, strong_maximal(noise, family).values)

    def test_weighted_maximal_of_power_weight(self, standard_pair):
        u = power_weight(DOMAINS[0], -0.5)
        w = tensor_weight(u, MeshWeight1D.constant(DOMAINS[1], 1.0))
        values = np.zeros((8, 8))
        values[0, :] = 1.0
        f = MeshFunction2D(DOMAINS, values)
        weighted = weighted_strong_maximal(f, w, standard_pair).values
        plain = strong_maximal(f, standard_pair).values
        # ω piles up mass on the cell next to 0, so the weighted average over
        # [0, 1/2) x [0, 1) is larger than the plain one
        assert weighted[3, 0] == pytest.approx(u.values[0] / u.values[:4].sum())
        assert plain[3, 0] == pytest.approx(0.25)
        assert weighted[3, 0] > plain[3, 0]
        assert weighted[0] == pytest.approx(np.ones(8))

    def test_weight_mismatch(self, noise):
        w = MeshWeight2D.constant((Domain.torus(2), Domain.torus(2)), 1.0)
        with pytest.raises(DomainError, match="different meshes"):
            strong_maximal(noise, "1/3", w)


class TestProductWeights:
    """Test rectangle A_p constants."""

    def test_product_cdy_of_constant(self):
        w = MeshWeight2D.constant(DOMAINS, 3.0)
        assert product_cdy(w, "1/3") == pytest.approx(2.0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_tensor_weight(self, p):
        u = generate_weight("cascade", DOMAINS[0], seed=4, ratio_bound=2.0)
        w = tensor_weight(u, MeshWeight1D.constant(DOMAINS[1], 1.0))
        report = product_weight_check(w, p, "1/3")
        assert report.passed, report.details
        assert report.details["monotone"]
        assert set(report.details["slices"]) == {
            f"axis{a}_{name}" for a in (1, 2) for name in ("continuous", "std", "shifted")
        }
        # ω is constant along the second axis
        assert report.details["slices"]["axis2_continuous"] == pytest.approx(1.0)

    def test_rejects_infinite_exponent(self):
        with pytest.raises(DomainError, match="1 <= p < inf"):
            product_weight_check(MeshWeight2D.constant(DOMAINS, 1.0), math.inf, "1/3")


class TestProductHaar:
    """Test the product Haar system and the rectangle Carleson sums."""

    def test_parseval_and_bessel(self, noise):
        pairs = GridPair.all_pairs(DOMAINS, "2/5")
        report = check_parseval_2d(noise, pairs["dd"])
        assert report.passed, report.details
        for name in ("dδ", "δd", "δδ"):
            assert check_parseval_2d(noise, pairs[name]).passed

    def test_product_haar_coefficient(self, standard_pair):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        coefficients = haar2_transform(product_haar(first, second), standard_pair)
        block = coefficients.haar_block
        assert block.sum() == pytest.approx(1.0)
        assert np.count_nonzero(np.abs(block) > 1e-12) == 1

    def test_single_rectangle_bmo(self, standard_pair):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        report = product_bmo_dyadic(product_haar(first, second), standard_pair, [])
        assert report.value == pytest.approx(8.0)
        assert report.argmax == f"{first} x {second}"

    def test_needs_open_sets(self, noise, standard_pair):
        with pytest.raises(DomainError, match="at least one open set"):
            product_bmo_dyadic(noise, standard_pair, [], include_rectangles=False)

    def test_verify_product_bmo(self, noise):
        rng = np.random.default_rng(3)
        omegas = [staircase(rng, DOMAINS, steps=3) for _ in range(6)]
        for pair in GridPair.all_pairs(DOMAINS, "1/3").values():
            report = verify_product_bmo(noise, pair, omegas)
            assert report.passed, report.details
            assert report.details["partial"] <= report.details["value"]

    def test_product_bmo_sup_bound_is_tight(self, standard_pair):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        d1, d2 = DOMAINS
        # Ω is exactly the support of the product Haar function
        omega = OpenSetApprox(
            DOMAINS,
            (MeshRectangle(ArbitraryInterval.of("1/2", "1/2", d1), ArbitraryInterval.of("0", "1/4", d2)),),
        )
        report = verify_product_bmo(product_haar(first, second), standard_pair, [omega])
        assert report.passed, report.details
        assert report.bound == pytest.approx(8.0)
        assert report.measured == pytest.approx(8.0)
        assert report.slack == pytest.approx(0.0, abs=1e-9)
        assert report.details["localized"]

    def test_product_bmo_bound_ignores_omegas(self, noise, standard_pair):
        rng = np.random.default_rng(4)
        omegas = [staircase(rng, DOMAINS, steps=2) for _ in range(4)]
        few = verify_product_bmo(noise, standard_pair, omegas[:1])
        many = verify_product_bmo(noise, standard_pair, omegas)
        assert few.bound == many.bound == pytest.approx(float(np.max(noise.values**2)))
        assert few.measured <= many.measured

    def test_product_bmo_fails_above_sup_norm(self, standard_pair, monkeypatch):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        f = product_haar(first, second)
        inflated = product_bmo_dyadic(f, standard_pair, [])
        monkeypatch.setattr(
            "dyadic_grids.product.product_bmo_dyadic",
            lambda *args, **kwargs: replace(inflated, value=2 * inflated.value),
        )
        report = verify_product_bmo(f, standard_pair, [])
        assert not report.passed
        assert report.measured == pytest.approx(16.0)

    def test_h1_norm_of_product_haar(self, standard_pair):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        # |R|^(-1/2) on R integrates to |R|^(1/2)
        norm = product_h1_dyadic_norm(product_haar(first, second), standard_pair)
        assert norm == pytest.approx(math.sqrt(1 / 8))

    def test_pairing(self, noise):
        g = random_function_2d(np.random.default_rng(9), DOMAINS, "blocks")
        for pair in GridPair.all_pairs(DOMAINS, "1/3").values():
            report = h1_bmo_pairing(noise, g, pair)
            assert report.passed, report.details
            assert report.measured >= 0

    def test_vmo_truncation(self, standard_pair, noise):
        first = IntervalId(standard_pair.first, 1, 1)
        second = IntervalId(standard_pair.second, 2, 0)
        f = product_haar(first, second)
        assert np.allclose(vmo_truncation_2d(f, standard_pair, 3).values, f.values)
        assert np.allclose(vmo_truncation_2d(f, standard_pair, 0).values, 0.0)
        with pytest.raises(DomainError, match=">= 0"):
            vmo_truncation_2d(noise, standard_pair, -1)
        with pytest.raises(ResolutionError, match="standard pair"):
            vmo_truncation_2d(noise, GridPair.all_pairs(DOMAINS, "1/3")["δδ"], 2)
