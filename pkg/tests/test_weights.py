#!/usr/bin/env python3
"""Tests for weight class constants and the grid intersection bounds."""

import math
from fractions import Fraction

import numpy as np
import pytest

from dyadic_grids.errors import DomainError
from dyadic_grids.grids import Domain, GridSpec, IntervalId
from dyadic_grids.mesh import ContinuousFamily, MeshWeight1D
from dyadic_grids.tools.generators import generate_weight, power_weight
from dyadic_grids.weights import (
    WeightClass,
    WeightFunctionals,
    WeightKind,
    class_constant,
    dyadic_doubling,
    generate_dyadic_doubling,
    intersection_bound,
    measured_cdy,
    rh1_ainfty_relation,
    verify_intersection,
)


@pytest.fixture
def cascade() -> MeshWeight1D:
    return generate_dyadic_doubling(11, Domain.torus(5), 3.0)


class TestWeightClass:
    """Test class parsing and validation."""

    @pytest.mark.parametrize(
        ("text", "kind", "p"),
        [
            ("a2", WeightKind.AP, 2.0),
            ("A1", WeightKind.AP, 1.0),
            ("ainf", WeightKind.AP, math.inf),
            ("rh1", WeightKind.RH, 1.0),
            ("rh3.5", WeightKind.RH, 3.5),
            ("rhinf", WeightKind.RH, math.inf),
            ("doubling", WeightKind.DOUBLING, None),
        ],
    )
    def test_parse(self, text, kind, p):
        parsed = WeightClass.parse(text)
        assert parsed.kind is kind
        assert parsed.p == p

    def test_labels(self):
        assert WeightClass.parse("ainf").label == "ainf"
        assert WeightClass.ap(2).label == "a2"
        assert str(WeightClass.doubling()) == "doubling"

    def test_invalid(self):
        with pytest.raises(DomainError, match="Unknown weight class"):
            WeightClass.parse("bmo")
        with pytest.raises(DomainError, match="p must be >= 1"):
            WeightClass.parse("a0.5")
        with pytest.raises(DomainError, match="no exponent"):
            WeightClass(WeightKind.DOUBLING, 2.0)


class TestClassConstants:
    """Test constants on hand-computable weights."""

    def test_two_valued_weight(self):
        domain = Domain.torus(1)
        w = MeshWeight1D(domain, np.array([2.0, 1.0]))
        standard = GridSpec.standard(domain)

        a2 = class_constant(w, WeightClass.ap(2), standard)
        assert a2.value == pytest.approx(1.125)
        assert a2.argmax == IntervalId(standard, 0, 0)

        a1 = class_constant(w, WeightClass.ap(1), standard)
        assert a1.value == pytest.approx(1.5)

        rhinf = class_constant(w, WeightClass.rh(math.inf), standard)
        assert rhinf.functional == pytest.approx(2 / 1.5)
        assert rhinf.doubling == pytest.approx(3.0)
        assert rhinf.value == pytest.approx(3.0)

    def test_dyadic_doubling_example(self):
        domain = Domain.torus(1)
        w = MeshWeight1D(domain, np.array([2.0, 1.0]))
        standard = GridSpec.standard(domain)
        value, where = dyadic_doubling(w, standard)
        assert value == pytest.approx(3.0)
        assert where == IntervalId(standard, 1, 1)

    @pytest.mark.parametrize("name", ["a1", "a2", "ainf", "rh2", "rhinf"])
    def test_constant_weight(self, name):
        domain = Domain.torus(3)
        w = MeshWeight1D.constant(domain, 4.0)
        report = class_constant(w, WeightClass.parse(name), ContinuousFamily.for_delta(domain, "1/3"))
        assert report.functional == pytest.approx(1.0)

    def test_grid_rh_includes_doubling(self):
        domain = Domain.torus(3)
        w = MeshWeight1D.constant(domain, 1.0)
        report = class_constant(w, WeightClass.rh(2), GridSpec.standard(domain))
        assert report.functional == pytest.approx(1.0)
        assert report.value == pytest.approx(2.0)

    def test_grid_constants_below_continuous(self, cascade):
        family = ContinuousFamily.for_delta(cascade.domain, "1/5")
        for name in ("a2", "rh2", "ainf"):
            weight_class = WeightClass.parse(name)
            cont = class_constant(cascade, weight_class, family)
            for grid in family.grids:
                assert class_constant(cascade, weight_class, grid).functional <= cont.functional

    def test_continuous_doubling(self):
        domain = Domain.torus(4)
        w = MeshWeight1D.constant(domain, 1.0)
        report = class_constant(w, WeightClass.doubling(), ContinuousFamily())
        assert report.value == pytest.approx(2.0)


class TestCascade:
    """Test the seeded dyadic doubling cascade."""

    @pytest.mark.parametrize("domain", [Domain.torus(6), Domain.line(2, 4)], ids=str)
    def test_standard_doubling_bound(self, domain):
        w = generate_dyadic_doubling(3, domain, 2.0)
        value, _ = dyadic_doubling(w, GridSpec.standard(domain))
        assert value <= 3.0 + 1e-9
        assert math.fsum(w.values) * float(domain.cell_length) == pytest.approx(float(domain.length))

    def test_seeded(self):
        domain = Domain.torus(4)
        first = generate_dyadic_doubling(5, domain, 3.0)
        second = generate_dyadic_doubling(5, domain, 3.0)
        assert np.array_equal(first.values, second.values)

    def test_ratio_one_is_constant(self):
        w = generate_dyadic_doubling(0, Domain.torus(3), 1.0)
        assert np.allclose(w.values, 1.0)

    def test_invalid_ratio(self):
        with pytest.raises(DomainError, match="Ratio bound"):
            generate_dyadic_doubling(0, Domain.torus(3), 0.5)


class TestIntersection:
    """Test the continuous-versus-grid bounds."""

    def test_bound_formulas(self):
        six = Fraction(6)
        assert intersection_bound(WeightClass.ap(2), six, 2.0, 1.0) == pytest.approx(72.0)
        assert intersection_bound(WeightClass.ap(1), six, 2.0, 1.0) == pytest.approx(12.0)
        assert intersection_bound(WeightClass.rh(math.inf), six, 2.0, 2.0) == pytest.approx(48.0)
        assert intersection_bound(WeightClass.doubling(), six, 0.0, 2.0) == pytest.approx(48.0)
        assert intersection_bound(WeightClass.ap(math.inf), six, 0.0, 1.0, {2.0: 1.5, 3.0: 1.0}) == pytest.approx(54.0)

    @pytest.mark.parametrize("name", ["a1", "a2", "ainf", "rh1", "rh2", "rhinf", "doubling"])
    def test_cascade_passes(self, cascade, name):
        report = verify_intersection(cascade, "1/3", WeightClass.parse(name))
        assert report.passed, report.details
        assert report.details["monotone"]

    def test_cdy_is_reused(self, cascade):
        cdy = measured_cdy(cascade, "1/3")
        assert cdy >= 2.0 - 1e-12
        report = verify_intersection(cascade, "1/3", WeightClass.rh(2), cdy=cdy)
        assert report.details["cdy"] == cdy

    def test_rh1_ainfty(self, cascade):
        report = rh1_ainfty_relation(cascade)
        assert report.passed
        assert report.details["rh1"] >= 0.0

    def test_shared_functionals_match_fresh_calls(self, cascade):
        functionals = WeightFunctionals(cascade)
        for delta in ("1/3", "2/5"):
            cdy = measured_cdy(cascade, delta, functionals=functionals)
            assert cdy == measured_cdy(cascade, delta)
            for name in ("a2", "rh2", "ainf"):
                weight_class = WeightClass.parse(name)
                shared = verify_intersection(cascade, delta, weight_class, cdy, functionals)
                fresh = verify_intersection(cascade, delta, weight_class, cdy)
                assert shared.measured == fresh.measured
                assert shared.bound == fresh.bound
                assert shared.details == fresh.details
        # aligned intervals and the standard grid are shared across both deltas
        assert (WeightClass.ap(2).label, ContinuousFamily()) in functionals.constants


def families(domain: Domain) -> list:
    return [
        ContinuousFamily.for_delta(domain, "1/3"),
        GridSpec.standard(domain),
        GridSpec.shifted(domain, "1/5"),
    ]


@pytest.fixture(params=[0, 1, 2, 3, 4], ids=lambda seed: f"seed{seed}")
def random_cascade(request) -> MeshWeight1D:
    return generate_dyadic_doubling(request.param, Domain.torus(5), 3.0)


class TestFunctionalProperties:
    """Test lower bounds, nesting in p and A2 duality on random cascades."""

    def test_lower_bounds(self, random_cascade):
        for family in families(random_cascade.domain):
            for name in ("a1", "a2", "a4", "ainf", "rh2", "rhinf"):
                report = class_constant(random_cascade, WeightClass.parse(name), family)
                assert report.functional >= 1.0 - 1e-9, (name, family.label)
            rh1 = class_constant(random_cascade, WeightClass.rh(1), family)
            assert rh1.functional >= -1e-9

    def test_ap_nonincreasing_in_p(self, random_cascade):
        exponents = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, math.inf]
        for family in families(random_cascade.domain):
            values = [
                class_constant(random_cascade, WeightClass.ap(p), family).functional
                for p in exponents
            ]
            for p, larger, smaller in zip(exponents[1:], values, values[1:], strict=True):
                assert smaller <= larger * (1 + 1e-9), (p, family.label)

    def test_a2_of_reciprocal(self, random_cascade):
        reciprocal = MeshWeight1D(random_cascade.domain, 1.0 / random_cascade.values)
        for family in families(random_cascade.domain):
            direct = class_constant(random_cascade, WeightClass.ap(2), family)
            dual = class_constant(reciprocal, WeightClass.ap(2), family)
            assert dual.functional == pytest.approx(direct.functional, rel=1e-9)

    def test_ap_dual_exponent(self, random_cascade):
        # A_3(ω)^(1/2) = A_(3/2)(ω^(-1/2)) interval by interval
        sigma = MeshWeight1D(random_cascade.domain, random_cascade.values**-0.5)
        for family in families(random_cascade.domain):
            a3 = class_constant(random_cascade, WeightClass.ap(3), family).functional
            dual = class_constant(sigma, WeightClass.ap(1.5), family).functional
            assert dual == pytest.approx(math.sqrt(a3), rel=1e-9)


class TestPowerWeight:
    """Test |x|^a sampled on the torus."""

    def test_zero_exponent_is_constant(self):
        w = power_weight(Domain.torus(4), 0.0)
        assert np.allclose(w.values, 1.0)

    @pytest.mark.parametrize("exponent", [-0.5, 0.5, 2.0])
    def test_cell_averages(self, exponent):
        domain = Domain.torus(6)
        w = generate_weight("power", domain, exponent=exponent)
        total = math.fsum(w.values) * float(domain.cell_length)
        # ∫ |x|^a over [-1/2, 1/2)
        assert total == pytest.approx(2 * 0.5 ** (exponent + 1) / (exponent + 1))
        assert np.allclose(w.values, w.values[::-1])

    def test_singular_weight_is_in_a2(self):
        domain = Domain.torus(6)
        family = ContinuousFamily.for_delta(domain, "1/3")
        report = class_constant(power_weight(domain, -0.5), WeightClass.ap(2), family)
        assert 1.0 < report.functional < 10.0
        # |x|^(-1/2) is unbounded near 0, so it is not in RH_∞ uniformly in L
        rhinf = WeightClass.rh(math.inf)
        coarse_domain = Domain.torus(3)
        coarse = class_constant(power_weight(coarse_domain, -0.5), rhinf, GridSpec.standard(coarse_domain))
        fine = class_constant(power_weight(domain, -0.5), rhinf, GridSpec.standard(domain))
        assert fine.functional > coarse.functional

    def test_not_integrable(self):
        with pytest.raises(DomainError, match="not locally integrable"):
            power_weight(Domain.torus(3), -1.0)
