#!/usr/bin/env python3
"""
Uncentered maximal functions over interval families, H¹(ω) atoms and the
splitting of atomic decompositions between the standard and shifted grids.

Maximal functions are evaluated at mesh cell centers.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from dyadic_grids.covering import ArbitraryInterval, cover, interval_contains
from dyadic_grids.errors import DomainError, PreconditionError, VerificationError
from dyadic_grids.exact import comparability_exponent, covering_constant, parse_rational
from dyadic_grids.grids import Domain, GridFamily, GridSpec, IntervalId
from dyadic_grids.mesh import (
    ContinuousFamily,
    IntervalFamily,
    MeshFunction1D,
    MeshIntegrator,
    MeshWeight1D,
    family_batches,
    family_max_at_centers,
    interval_measure,
)
from dyadic_grids.verification import VerificationReport, within
from dyadic_grids.weights import measured_cdy

log = logging.getLogger(__name__)

ATOM_RTOL = 1e-12


def hl_maximal(
    f: MeshFunction1D, family: IntervalFamily, w: MeshWeight1D | None = None
) -> MeshFunction1D:
    """sup over family intervals Q containing x of (1/ω(Q)) ∫_Q |f| ω, at each cell center.

    Without a weight ω ≡ 1.
    """
    domain = f.domain
    magnitude = np.abs(f.values)
    if w is None:
        numerator = MeshIntegrator(domain, magnitude)
        denominator = None
    else:
        if w.domain != domain:
            raise DomainError(f"Weight on {w.domain}, function on {domain}")
        numerator = MeshIntegrator(domain, magnitude * w.values)
        denominator = MeshIntegrator(domain, w.values)
    best = np.zeros(domain.n_cells)
    for batch in family_batches(domain, family):
        mass = numerator.integrate(batch)
        size = batch.measures if denominator is None else denominator.integrate(batch)
        best = np.maximum(best, family_max_at_centers(batch, mass / size))
    return MeshFunction1D(domain, best)


def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator / denominator
    ratio[(numerator == 0) & (denominator == 0)] = 0.0
    return ratio


def verify_maximal_comparability(
    f: MeshFunction1D,
    delta: Fraction | str,
    w: MeshWeight1D | None = None,
    cdy: float | None = None,
    max_cdy: float | None = None,
) -> VerificationReport:
    """Pointwise two-sided comparison of M with M_d + M_δ.

    At every cell center: M_d + M_δ <= 2M exactly, and M <= C(δ)·max(M_d, M_δ)
    without a weight, or M_ω <= C(δ)·C_dy^log2(4C(δ))·(M_d,ω + M_δ,ω) with one.

    Raises:
        PreconditionError: If the weight's measured C_dy exceeds max_cdy.
    """
    delta = parse_rational(delta)
    constant = covering_constant(delta)
    domain = f.domain
    standard = GridSpec.standard(domain)
    shifted = GridSpec.shifted(domain, delta)
    m_std = hl_maximal(f, standard, w).values
    m_shf = hl_maximal(f, shifted, w).values
    m_all = hl_maximal(f, ContinuousFamily.for_delta(domain, delta), w).values

    lower_ok = (m_std + m_shf) <= 2 * m_all
    if w is None:
        bound_factor = float(constant)
        ratio = _ratio(m_all, np.maximum(m_std, m_shf))
        cdy_used = None
    else:
        cdy_used = measured_cdy(w, delta) if cdy is None else cdy
        if max_cdy is not None and cdy_used > max_cdy:
            log.warning("weight has C_dy=%.4g above %.4g, not asserting", cdy_used, max_cdy)
            raise PreconditionError(
                f"Measured dyadic doubling constant {cdy_used:.6g} exceeds {max_cdy:.6g}"
            )
        bound_factor = float(constant) * cdy_used ** comparability_exponent(constant)
        ratio = _ratio(m_all, m_std + m_shf)
    upper_ok = ratio <= bound_factor * (1 + 1e-9)
    worst = int(np.argmax(np.where(lower_ok, ratio, np.inf)))
    passed = bool(np.all(lower_ok) and np.all(upper_ok))
    x = domain.left + (Fraction(worst) + Fraction(1, 2)) * domain.cell_length
    return VerificationReport(
        name="maximal_comparability" if w is None else "weighted_maximal_comparability",
        passed=passed,
        measured=float(ratio[worst]),
        bound=bound_factor,
        delta=delta,
        checks=2 * domain.n_cells,
        witness={"x": x},
        details={
            "M": float(m_all[worst]),
            "M_std": float(m_std[worst]),
            "M_shifted": float(m_shf[worst]),
            "lower_failures": int(np.count_nonzero(~lower_ok)),
            "cdy": cdy_used,
        },
    ).logged()


@dataclass(frozen=True, eq=False)
class Atom:
    """Mesh samples `values`/`normalization` supported in an interval.

    Rescaling changes `normalization` and `support` only, the samples are
    never touched.
    """

    support: ArbitraryInterval | IntervalId
    values: np.ndarray
    normalization: float = 1.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not self.normalization > 0:
            raise DomainError(f"Atom normalization must be positive, got {self.normalization}")

    @property
    def domain(self) -> Domain:
        if isinstance(self.support, IntervalId):
            return self.support.grid.domain
        return self.support.domain

    @property
    def function(self) -> np.ndarray:
        return self.values / self.normalization

    def to_json(self) -> dict[str, Any]:
        return {
            "support": self.support.to_json(),
            "values": self.values.tolist(),
            "normalization": self.normalization,
        }


def atom_conditions(atom: Atom, w: MeshWeight1D) -> dict[str, bool]:
    """Conditions (a) support, (b) L²(ω) size and (c) ω-mean zero of an H¹(ω) atom."""
    domain = w.domain
    if atom.domain != domain or atom.values.shape != (domain.n_cells,):
        raise DomainError(f"Atom does not live on {domain}")
    cell = domain.cell_length
    support = atom.support
    supported = all(
        interval_contains(
            support.left, support.length, domain.left + j * cell, cell, domain.is_torus
        )
        for j in np.flatnonzero(atom.values != 0).tolist()
    )
    a = atom.function
    h = float(cell)
    norm = math.sqrt(math.fsum(a**2 * w.values) * h)
    measure = interval_measure(w, support)
    mean = math.fsum(a * w.values) * h
    return {
        "support": supported,
        "size": norm <= measure**-0.5 * (1 + ATOM_RTOL),
        "cancellation": abs(mean) <= ATOM_RTOL * norm * math.sqrt(measure),
    }


def is_atom(atom: Atom, w: MeshWeight1D) -> bool:
    return all(atom_conditions(atom, w).values())


def atom_constant(constant: Fraction, cdy: float) -> float:
    """C₀ = C(δ)^(1/2)·C_dy^((1/2)·log2(4C(δ)))."""
    return math.sqrt(float(constant)) * cdy ** (0.5 * comparability_exponent(constant))


@dataclass(frozen=True)
class RescaledAtom:
    grid: GridSpec
    interval: IntervalId
    c0: float
    atom: Atom


def atom_rescale(
    a: Atom, w: MeshWeight1D, delta: Fraction | str, cdy: float | None = None
) -> RescaledAtom:
    """C₀⁻¹·a as an atom of the grid interval I = cover(Q, δ).

    Raises:
        DomainError: If a is not an atom for ω or its support is not an
            ArbitraryInterval.
        VerificationError: If the rescaled atom fails validation.
    """
    delta = parse_rational(delta)
    if not isinstance(a.support, ArbitraryInterval):
        raise DomainError("Rescaling starts from an atom on an arbitrary interval")
    if not is_atom(a, w):
        raise DomainError(f"Not an H1(w) atom: {atom_conditions(a, w)}")
    cdy = measured_cdy(w, delta) if cdy is None else cdy
    c0 = atom_constant(covering_constant(delta), cdy)
    found = cover(a.support, delta).interval
    rescaled = Atom(found, a.values, a.normalization * c0)
    conditions = atom_conditions(rescaled, w)
    if not all(conditions.values()):
        raise VerificationError(f"Rescaled atom on {found} fails {conditions}")
    return RescaledAtom(found.grid, found, c0, rescaled)


@dataclass(frozen=True)
class AtomTerm:
    """λ·a at a fixed position of a decomposition.

    Terms derived from another term keep it as `origin`, so their
    contribution is computed from the original coefficient and samples.
    """

    position: int
    coefficient: float
    atom: Atom
    origin: "AtomTerm | None" = None

    def contribution(self) -> np.ndarray:
        if self.origin is not None:
            return self.origin.contribution()
        return self.coefficient * self.atom.function


@dataclass(frozen=True)
class AtomicDecomposition:
    domain: Domain
    terms: tuple[AtomTerm, ...] = field(default_factory=tuple)

    @classmethod
    def of(
        cls, domain: Domain, pairs: list[tuple[float, Atom]]
    ) -> "AtomicDecomposition":
        return cls(domain, tuple(AtomTerm(i, c, a) for i, (c, a) in enumerate(pairs)))

    @property
    def norm_proxy(self) -> float:
        """Σ |λ_i|."""
        return math.fsum(abs(t.coefficient) for t in self.terms)

    def merged(self, other: "AtomicDecomposition") -> "AtomicDecomposition":
        terms = sorted(self.terms + other.terms, key=lambda t: t.position)
        return AtomicDecomposition(self.domain, tuple(terms))

    def reconstruct(self) -> MeshFunction1D:
        """Σ λ_i a_i, summed in position order."""
        values = np.zeros(self.domain.n_cells)
        for term in sorted(self.terms, key=lambda t: t.position):
            values = values + term.contribution()
        return MeshFunction1D(self.domain, values)


def decompose_h1(
    d: AtomicDecomposition,
    w: MeshWeight1D,
    delta: Fraction | str,
    cdy: float | None = None,
) -> tuple[AtomicDecomposition, AtomicDecomposition]:
    """Split Σ λ_i a_i into standard-grid and shifted-grid atoms with coefficients λ_i·C₀."""
    delta = parse_rational(delta)
    cdy = measured_cdy(w, delta) if cdy is None else cdy
    standard: list[AtomTerm] = []
    shifted: list[AtomTerm] = []
    for term in d.terms:
        rescaled = atom_rescale(term.atom, w, delta, cdy)
        routed = AtomTerm(term.position, term.coefficient * rescaled.c0, rescaled.atom, term)
        if rescaled.grid.family is GridFamily.STANDARD:
            standard.append(routed)
        else:
            shifted.append(routed)
    log.debug(
        "decomposition of %d atoms: %d standard, %d shifted",
        len(d.terms),
        len(standard),
        len(shifted),
    )
    return (
        AtomicDecomposition(d.domain, tuple(standard)),
        AtomicDecomposition(d.domain, tuple(shifted)),
    )


def verify_decomposition(
    d: AtomicDecomposition,
    w: MeshWeight1D,
    delta: Fraction | str,
    cdy: float | None = None,
) -> VerificationReport:
    """Exact reconstruction and the C₀ norm bound of `decompose_h1`."""
    delta = parse_rational(delta)
    cdy = measured_cdy(w, delta) if cdy is None else cdy
    c0 = atom_constant(covering_constant(delta), cdy)
    standard, shifted = decompose_h1(d, w, delta, cdy)
    original = d.reconstruct().values
    rebuilt = standard.merged(shifted).reconstruct().values
    exact = bool(np.array_equal(original, rebuilt))
    measured = standard.norm_proxy + shifted.norm_proxy
    bound = c0 * d.norm_proxy
    return VerificationReport(
        name="h1_decomposition",
        passed=exact and within(measured, bound),
        measured=measured,
        bound=bound,
        delta=delta,
        checks=len(d.terms),
        details={
            "c0": c0,
            "standard_terms": len(standard.terms),
            "shifted_terms": len(shifted.terms),
            "exact": exact,
        },
    ).logged()
