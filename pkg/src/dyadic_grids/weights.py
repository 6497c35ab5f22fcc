#!/usr/bin/env python3
"""
Muckenhoupt A_p, reverse Hölder RH_p and doubling constants of mesh weights.

Every constant is a supremum of a per-interval functional over an interval
family: a single grid (levels in the domain) or the continuous stand-in
(`ContinuousFamily`). The functionals are vectorized over interval batches.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np

from dyadic_grids.covering import ArbitraryInterval
from dyadic_grids.errors import DomainError
from dyadic_grids.exact import (
    comparability_exponent,
    covering_constant,
    parse_rational,
)
from dyadic_grids.grids import Domain, GridSpec, IntervalId
from dyadic_grids.mesh import (
    ContinuousFamily,
    IntervalBatch,
    IntervalFamily,
    MeshIntegrator,
    MeshWeight1D,
    aligned_batch,
    family_batches,
    grid_level_batch,
    resolution_for,
)
from dyadic_grids.verification import VerificationReport, within

log = logging.getLogger(__name__)

# exponents tried when bounding A_∞ through A_p
AINF_EXPONENTS = (2.0, 3.0, 4.0, 6.0, 8.0, 16.0)


class WeightKind(str, Enum):
    AP = "a"
    RH = "rh"
    DOUBLING = "doubling"


@dataclass(frozen=True)
class WeightClass:
    """A_p or RH_p with p in [1, inf], or the doubling class."""

    kind: WeightKind
    p: float | None = None

    def __post_init__(self) -> None:
        if self.kind is WeightKind.DOUBLING:
            if self.p is not None:
                raise DomainError("The doubling class takes no exponent")
            return
        if self.p is None or math.isnan(self.p) or self.p < 1:
            raise DomainError(f"Exponent p must be >= 1, got {self.p}")

    @classmethod
    def ap(cls, p: float) -> "WeightClass":
        return cls(WeightKind.AP, float(p))

    @classmethod
    def rh(cls, p: float) -> "WeightClass":
        return cls(WeightKind.RH, float(p))

    @classmethod
    def doubling(cls) -> "WeightClass":
        return cls(WeightKind.DOUBLING)

    @classmethod
    def parse(cls, text: str) -> "WeightClass":
        """Parse names like "a2", "a1", "ainf", "rh2", "rhinf", "rh1", "doubling"."""
        text = text.strip().lower()
        if text == "doubling":
            return cls.doubling()
        for kind in (WeightKind.RH, WeightKind.AP):
            if text.startswith(kind.value):
                exponent = text[len(kind.value) :]
                try:
                    p = math.inf if exponent in ("inf", "∞") else float(exponent)
                except ValueError:
                    break
                return cls(kind, p)
        raise DomainError(f"Unknown weight class {text!r}")

    @property
    def label(self) -> str:
        if self.kind is WeightKind.DOUBLING:
            return "doubling"
        assert self.p is not None
        exponent = "inf" if math.isinf(self.p) else f"{self.p:g}"
        return f"{self.kind.value}{exponent}"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ConstantReport:
    """Supremum of a class functional over one interval family.

    `value` is the class constant. For grid RH_p it is the larger of the
    functional sup and the dyadic doubling constant; `functional` always
    holds the functional sup alone.
    """

    weight_class: WeightClass
    family: str
    value: float
    argmax: IntervalId | ArbitraryInterval | None
    functional: float
    doubling: float | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "class": self.weight_class.label,
            "family": self.family,
            "value": self.value,
            "functional": self.functional,
            "doubling": self.doubling,
            "argmax": self.argmax.to_json() if self.argmax is not None else None,
        }


class WeightFunctionals:
    """Per-interval class functionals of one weight, with cached integrators.

    Class constants and dyadic doubling scans computed through one instance
    are memoized, so a weight checked against several δ pays for the
    δ-independent families (aligned intervals, standard grid) once.
    """

    def __init__(self, w: MeshWeight1D) -> None:
        self.weight = w
        self.domain = w.domain
        self.mass = MeshIntegrator(w.domain, w.values)
        self._derived: dict[str, MeshIntegrator] = {}
        self.constants: dict[tuple[str, IntervalFamily], ConstantReport] = {}
        self.doubling: dict[tuple[GridSpec, int], tuple[float, IntervalId | None]] = {}

    def _integrator(self, key: str, values: np.ndarray) -> MeshIntegrator:
        if key not in self._derived:
            self._derived[key] = MeshIntegrator(self.domain, values)
        return self._derived[key]

    def _power(self, exponent: float) -> MeshIntegrator:
        return self._integrator(f"pow{exponent!r}", self.weight.values**exponent)

    def evaluate(self, weight_class: WeightClass, batch: IntervalBatch) -> np.ndarray:
        w = self.weight.values
        avg = self.mass.averages(batch)
        p = weight_class.p
        if weight_class.kind is WeightKind.AP:
            assert p is not None
            if p == 1:
                low, _ = self.mass.extrema(batch)
                return avg / low
            if math.isinf(p):
                logs = self._integrator("log", np.log(w)).averages(batch)
                return avg * np.exp(-logs)
            dual = self._power(-1.0 / (p - 1.0)).averages(batch)
            return avg * dual ** (p - 1.0)
        if weight_class.kind is WeightKind.RH:
            assert p is not None
            if p == 1:
                entropy = self._integrator("wlogw", w * np.log(w)).averages(batch)
                return entropy / avg - np.log(avg)
            if math.isinf(p):
                _, high = self.mass.extrema(batch)
                return high / avg
            return self._power(p).averages(batch) ** (1.0 / p) / avg
        raise DomainError("Doubling is not an interval functional, use doubling_ratios")

    def doubling_ratios(
        self, max_fraction: Fraction = Fraction(1, 2)
    ) -> tuple[IntervalBatch, np.ndarray]:
        """ω(Q̃)/ω(Q) for aligned Q, Q̃ the concentric double.

        On the torus only |Q| <= max_fraction is used so that Q̃ is a proper
        arc; on the line only Q with Q̃ inside the window.
        """
        domain = self.domain
        n = domain.n_cells
        max_cells = n
        if domain.is_torus:
            max_cells = int(max_fraction * n)
        batch = aligned_batch(domain, 1, max_cells)
        fine = batch.at_resolution(2)
        starts = fine.starts - batch.lengths
        lengths = 4 * batch.lengths
        if domain.is_torus:
            keep = np.ones(len(batch), dtype=bool)
            starts = starts % fine.total_units
        else:
            keep = (starts >= 0) & (starts + lengths <= fine.total_units)
        doubled = IntervalBatch(domain, 2, starts[keep], lengths[keep])
        inner = batch.select(keep)
        return inner, self.mass.integrate(doubled) / self.mass.integrate(inner)


def _sup(
    batches: Iterable[IntervalBatch], values: Iterable[np.ndarray]
) -> tuple[float, IntervalId | ArbitraryInterval | None]:
    """Max over batches; ties go to the first occurrence in batch order."""
    best = -math.inf
    where: IntervalId | ArbitraryInterval | None = None
    for batch, vals in zip(batches, values, strict=True):
        if len(vals) == 0:
            continue
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            where = batch.label(i)
    return best, where


def _child_parent_ratios(
    functionals: WeightFunctionals, child: IntervalBatch, parent: IntervalBatch
) -> tuple[IntervalBatch, np.ndarray]:
    """ω(parent)/ω(child) for children whose parent lies in the domain."""
    order = np.argsort(parent.starts, kind="stable")
    sorted_starts = parent.starts[order]
    position = np.searchsorted(sorted_starts, child.starts, side="right") - 1
    total = child.total_units
    if child.domain.is_torus:
        # a child before the first parent start belongs to the wrapping parent
        position = np.where(position < 0, len(order) - 1, position)
    valid = position >= 0
    position = np.where(valid, position, 0)
    p_index = order[position]
    offset = child.starts - parent.starts[p_index]
    if child.domain.is_torus:
        offset %= total
    valid &= (offset >= 0) & (offset + child.lengths <= parent.lengths[p_index])
    child_mass = functionals.mass.integrate(child)
    parent_mass = functionals.mass.integrate(parent)
    kept = child.select(valid)
    return kept, parent_mass[p_index[valid]] / child_mass[valid]


def dyadic_doubling(
    w: MeshWeight1D,
    grid: GridSpec,
    max_level: int | None = None,
    functionals: WeightFunctionals | None = None,
) -> tuple[float, IntervalId | None]:
    """Dyadic doubling constant: max of ω(parent)/ω(child) over the grid.

    Children run from the level below the coarsest down to max_level
    (default: the mesh level; deeper levels subdivide mesh cells).
    """
    domain = w.domain
    max_level = domain.finest_level if max_level is None else max_level
    functionals = WeightFunctionals(w) if functionals is None else functionals
    cached = functionals.doubling.get((grid, max_level))
    if cached is not None:
        return cached
    extra = max(0, max_level - domain.finest_level)
    resolution = resolution_for([grid], extra)
    best = 1.0
    where: IntervalId | None = None
    parent = grid_level_batch(grid, domain.coarsest_level, resolution)
    for level in range(domain.coarsest_level + 1, max_level + 1):
        child = grid_level_batch(grid, level, resolution)
        kept, ratios = _child_parent_ratios(functionals, child, parent)
        if len(ratios):
            i = int(np.argmax(ratios))
            if ratios[i] > best:
                best = float(ratios[i])
                label = kept.label(i)
                assert isinstance(label, IntervalId)
                where = label
        parent = child
    log.debug("dyadic doubling of %s on %s: %.6g", grid.label, domain, best)
    functionals.doubling[(grid, max_level)] = (best, where)
    return best, where


def measured_cdy(
    w: MeshWeight1D,
    delta: Fraction | str,
    extra_levels: int = 2,
    functionals: WeightFunctionals | None = None,
) -> float:
    """C_dy: the larger dyadic doubling constant of {D, D^δ}, children to level L + extra_levels."""
    delta = parse_rational(delta)
    functionals = WeightFunctionals(w) if functionals is None else functionals
    max_level = w.domain.finest_level + extra_levels
    grids = (GridSpec.standard(w.domain), GridSpec.shifted(w.domain, delta))
    return max(dyadic_doubling(w, grid, max_level, functionals)[0] for grid in grids)


def class_constant(
    w: MeshWeight1D,
    weight_class: WeightClass,
    family: IntervalFamily,
    functionals: WeightFunctionals | None = None,
) -> ConstantReport:
    """Supremum of the class functional over the family.

    Pass the same `functionals` for repeated calls on one weight to reuse
    integrators and earlier suprema.

    Raises:
        DomainError: If the family lives on another domain.
    """
    functionals = WeightFunctionals(w) if functionals is None else functionals
    key = (weight_class.label, family)
    report = functionals.constants.get(key)
    if report is None:
        report = _class_constant(functionals, weight_class, family)
        functionals.constants[key] = report
    return report


def _class_constant(
    functionals: WeightFunctionals, weight_class: WeightClass, family: IntervalFamily
) -> ConstantReport:
    w = functionals.weight
    label = family.label
    if weight_class.kind is WeightKind.DOUBLING:
        if isinstance(family, GridSpec):
            value, where = dyadic_doubling(w, family, functionals=functionals)
            return ConstantReport(weight_class, label, value, where, value, value)
        batch, ratios = functionals.doubling_ratios()
        value, where_any = _sup([batch], [ratios])
        return ConstantReport(weight_class, label, value, where_any, value)

    if isinstance(family, ContinuousFamily) and family.grids and (
        w.domain.is_torus or family.cover_delta is None
    ):
        # aligned part first, then each grid, ties to the earlier part
        parts = [class_constant(w, weight_class, ContinuousFamily(), functionals)]
        parts += [class_constant(w, weight_class, grid, functionals) for grid in family.grids]
        best = parts[0]
        for part in parts[1:]:
            if part.functional > best.functional:
                best = part
        return ConstantReport(weight_class, label, best.functional, best.argmax, best.functional)

    batches = family_batches(w.domain, family)
    values = [functionals.evaluate(weight_class, batch) for batch in batches]
    functional, where_any = _sup(batches, values)
    if weight_class.kind is WeightKind.RH and isinstance(family, GridSpec):
        doubling, _ = dyadic_doubling(w, family, functionals=functionals)
        return ConstantReport(
            weight_class, label, max(functional, doubling), where_any, functional, doubling
        )
    return ConstantReport(weight_class, label, functional, where_any, functional)


def intersection_bound(
    weight_class: WeightClass,
    constant: Fraction,
    grid_max: float,
    cdy: float,
    ap_maxima: dict[float, float] | None = None,
) -> float:
    """Upper bound for the continuous constant in terms of the grid constants."""
    c = float(constant)
    chain = cdy ** comparability_exponent(constant)
    p = weight_class.p
    if weight_class.kind is WeightKind.DOUBLING:
        return cdy ** comparability_exponent(constant, factor=8)
    assert p is not None
    if weight_class.kind is WeightKind.AP:
        if p == 1:
            return c * grid_max
        if math.isinf(p):
            assert ap_maxima is not None
            return min(c**q * m for q, m in ap_maxima.items())
        return c**p * grid_max
    if p == 1:
        assert ap_maxima is not None
        return math.e * min(c**q * m for q, m in ap_maxima.items())
    if math.isinf(p):
        return chain * grid_max
    return c ** (1.0 / p) * chain * grid_max


def verify_intersection(
    w: MeshWeight1D,
    delta: Fraction | str,
    weight_class: WeightClass,
    cdy: float | None = None,
    functionals: WeightFunctionals | None = None,
) -> VerificationReport:
    """Continuous class constant against the standard and shifted grid constants.

    Checks that each grid functional sup is at most the continuous one
    (exact, the grid intervals are part of the continuous family) and that
    the continuous constant obeys the class bound with C = C(δ) and the
    measured C_dy.
    """
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    domain = w.domain
    standard = GridSpec.standard(domain)
    shifted = GridSpec.shifted(domain, delta)
    continuous_family = ContinuousFamily.for_delta(domain, delta)
    functionals = WeightFunctionals(w) if functionals is None else functionals
    if cdy is None:
        cdy = measured_cdy(w, delta, functionals=functionals)

    cont = class_constant(w, weight_class, continuous_family, functionals)
    std = class_constant(w, weight_class, standard, functionals)
    shf = class_constant(w, weight_class, shifted, functionals)

    monotone = True
    if weight_class.kind is not WeightKind.DOUBLING:
        monotone = std.functional <= cont.functional and shf.functional <= cont.functional

    ap_maxima = None
    p = weight_class.p
    if (weight_class.kind is WeightKind.AP and p == math.inf) or (
        weight_class.kind is WeightKind.RH and p == 1
    ):
        ap_maxima = {
            q: max(
                class_constant(w, WeightClass.ap(q), standard, functionals).value,
                class_constant(w, WeightClass.ap(q), shifted, functionals).value,
            )
            for q in AINF_EXPONENTS
        }
    grid_max = max(std.value, shf.value)
    bound = intersection_bound(weight_class, constant, grid_max, cdy, ap_maxima)
    passed = monotone and within(cont.value, bound)
    return VerificationReport(
        name=f"intersection_{weight_class.label}",
        passed=passed,
        measured=cont.value,
        bound=bound,
        delta=delta,
        witness={"Q": cont.argmax} if cont.argmax is not None else {},
        details={
            "constants": {"continuous": cont.value, "std": std.value, "shifted": shf.value},
            "monotone": monotone,
            "cdy": cdy,
            "C": constant,
        },
    ).logged()


def rh1_ainfty_relation(
    w: MeshWeight1D,
    family: IntervalFamily | None = None,
    functionals: WeightFunctionals | None = None,
) -> VerificationReport:
    """RH₁(ω)/e <= A_∞(ω) over the family's suprema.

    The upper relation is reported as the ratio A_∞/(e^(e^RH₁)/e^RH₁)
    without an assertion.
    """
    family = ContinuousFamily() if family is None else family
    rh1 = class_constant(w, WeightClass.rh(1), family, functionals)
    ainf = class_constant(w, WeightClass.ap(math.inf), family, functionals)
    lower = rh1.value / math.e
    upper_ratio = ainf.value / (math.exp(math.exp(rh1.value)) / math.exp(rh1.value))
    return VerificationReport(
        name="rh1_ainfty",
        passed=within(lower, ainf.value),
        measured=lower,
        bound=ainf.value,
        witness={"RH1": rh1.argmax, "Ainf": ainf.argmax},
        details={"rh1": rh1.value, "ainf": ainf.value, "upper_ratio": upper_ratio},
    ).logged()


def generate_dyadic_doubling(
    seed: int, domain: Domain, ratio_bound: float
) -> MeshWeight1D:
    """Multiplicative cascade down the standard tree.

    Each child receives a fraction in [1/(1+b), b/(1+b)] of its parent's
    mass, so the standard dyadic doubling constant is at most 1 + b.
    On the line the two halves of the window are split first.

    Raises:
        DomainError: If b < 1.
    """
    if ratio_bound < 1:
        raise DomainError(f"Ratio bound must be >= 1, got {ratio_bound}")
    rng = np.random.default_rng(seed)
    low = 1.0 / (1.0 + ratio_bound)
    high = ratio_bound / (1.0 + ratio_bound)
    if domain.is_torus:
        masses = np.array([1.0])
        depth = domain.finest_level
    else:
        split = rng.uniform(low, high) if high > low else 0.5
        masses = np.array([split, 1.0 - split]) * float(domain.length)
        depth = domain.finest_level + domain.window_level
    for _ in range(depth):
        if high > low:
            fractions = rng.uniform(low, high, size=masses.shape)
        else:
            fractions = np.full(masses.shape, 0.5)
        masses = np.stack([masses * fractions, masses * (1.0 - fractions)], axis=1).ravel()
    values = masses / float(domain.cell_length)
    log.debug(
        "cascade weight seed=%d b=%g on %s: min=%.3g max=%.3g",
        seed,
        ratio_bound,
        domain,
        values.min(),
        values.max(),
    )
    return MeshWeight1D(domain, values)
