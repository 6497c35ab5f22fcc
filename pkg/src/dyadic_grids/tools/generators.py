#!/usr/bin/env python3
"""Seeded generators for test functions, weights, atoms and open sets."""

import math
from dataclasses import replace
from typing import Any

import numpy as np

from dyadic_grids.covering import ArbitraryInterval
from dyadic_grids.errors import DomainError
from dyadic_grids.exact import reduce_mod1
from dyadic_grids.grids import Domain, GridSpec, IntervalId
from dyadic_grids.haar import haar_transform, inverse_transform
from dyadic_grids.maximal_hardy import Atom, AtomicDecomposition
from dyadic_grids.mesh import (
    MeshFunction1D,
    MeshFunction2D,
    MeshWeight1D,
    MeshWeight2D,
    weight_measure,
)
from dyadic_grids.product import MeshRectangle, OpenSetApprox
from dyadic_grids.weights import generate_dyadic_doubling


def generate_function(kind: str, domain: Domain, seed: int = 0, **kwargs: Any) -> MeshFunction1D:
    """Generate a 1D test function.

    Args:
        kind: "haar" (finite Haar sum), "step" (random step function),
            "indicator" (indicator of an aligned interval) or "noise"
        domain: Mesh domain
        seed: Seed for numpy's default_rng
        **kwargs: Kind-specific parameters

    Raises:
        DomainError: If kind is not supported
    """
    rng = np.random.default_rng(seed)
    if kind == "haar":
        return finite_haar(rng, domain, **kwargs)
    elif kind == "step":
        return step_function(rng, domain, **kwargs)
    elif kind == "indicator":
        return indicator(domain, **kwargs)
    elif kind == "noise":
        return MeshFunction1D(domain, rng.standard_normal(domain.n_cells))
    else:
        raise DomainError(f"Unsupported function kind: {kind}")


def generate_weight(
    kind: str,
    domain: Domain,
    seed: int = 0,
    ratio_bound: float = 3.0,
    exponent: float = -0.5,
    pieces: int = 4,
) -> MeshWeight1D:
    """Generate a 1D weight: "cascade" (dyadic doubling cascade), "step" or "power"."""
    if kind == "cascade":
        return generate_dyadic_doubling(seed, domain, ratio_bound)
    elif kind == "step":
        f = step_function(np.random.default_rng(seed), domain, pieces)
        return MeshWeight1D(domain, np.exp(f.values))
    elif kind == "power":
        return power_weight(domain, exponent)
    else:
        raise DomainError(f"Unsupported weight kind: {kind}")


def finite_haar(
    rng: np.random.Generator, domain: Domain, terms: int = 8, max_level: int | None = None
) -> MeshFunction1D:
    """Random finite sum of standard Haar functions with normal coefficients."""
    grid = GridSpec.standard(domain)
    zero = haar_transform(MeshFunction1D.constant(domain, 0.0), grid)
    top = domain.finest_level - 1 if max_level is None else min(max_level, domain.finest_level - 1)
    levels = {n: c.copy() for n, c in zero.levels.items()}
    for _ in range(terms):
        level = int(rng.integers(domain.coarsest_level, top + 1))
        index = int(rng.integers(len(levels[level])))
        levels[level][index] += rng.standard_normal()
    return inverse_transform(replace(zero, levels=levels))


def step_function(
    rng: np.random.Generator, domain: Domain, pieces: int = 4, scale: float = 1.0
) -> MeshFunction1D:
    """Random piecewise-constant function with breakpoints on the mesh."""
    n = domain.n_cells
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(pieces - 1, n - 1), replace=False))
    heights = rng.standard_normal(len(cuts) + 1) * scale
    values = np.repeat(heights, np.diff(np.concatenate([[0], cuts, [n]])))
    return MeshFunction1D(domain, values)


def indicator(domain: Domain, left: str = "0", length: str = "1/2") -> MeshFunction1D:
    """1_Q for an aligned interval Q = [left, left + length)."""
    q = ArbitraryInterval.of(left, length, domain)
    cell = domain.cell_length
    values = np.array(
        [
            1.0 if q.contains(domain.left + j * cell, cell) else 0.0
            for j in range(domain.n_cells)
        ]
    )
    return MeshFunction1D(domain, values)


def haar_function(interval_id: IntervalId) -> MeshFunction1D:
    """h_I on the mesh for an interval I of the standard grid."""
    domain = interval_id.grid.domain
    cell = domain.cell_length
    scale = float(interval_id.length) ** -0.5
    half = interval_id.length / 2
    values = np.zeros(domain.n_cells)
    for j in range(domain.n_cells):
        offset = domain.left + j * cell - interval_id.left
        if domain.is_torus:
            offset = reduce_mod1(offset)
        if 0 <= offset < interval_id.length:
            values[j] = scale if offset < half else -scale
    return MeshFunction1D(domain, values)


def power_weight(domain: Domain, exponent: float) -> MeshWeight1D:
    """|x|^a sampled as cell averages (exact integrals of the power on each cell)."""
    if exponent <= -1:
        raise DomainError(f"|x|^a is not locally integrable for a={exponent}")
    cell = float(domain.cell_length)
    left = float(domain.left) + cell * np.arange(domain.n_cells)
    right = left + cell

    def primitive(x: np.ndarray) -> np.ndarray:
        return np.sign(x) * np.abs(x) ** (exponent + 1) / (exponent + 1)

    if domain.is_torus:
        # distance to 0 on the circle
        left = np.where(left >= 0.5, left - 1.0, left)
        right = left + cell
    return MeshWeight1D(domain, (primitive(right) - primitive(left)) / cell)


def random_atom(
    rng: np.random.Generator, w: MeshWeight1D, min_cells: int = 2, max_cells: int | None = None
) -> Atom:
    """Mean-zero (against ω) atom on a random aligned interval, with ‖a‖_L²(ω) < ω(Q)^(-1/2)."""
    domain = w.domain
    n = domain.n_cells
    max_cells = n - 1 if max_cells is None else max_cells
    length = int(rng.integers(min_cells, max_cells + 1))
    start = int(rng.integers(0, n if domain.is_torus else n - length + 1))
    cell = domain.cell_length
    support = ArbitraryInterval(domain.left + start * cell, length * cell, domain)
    cells = (start + np.arange(length)) % n
    raw = rng.standard_normal(length)
    weights = w.values[cells]
    raw -= math.fsum(raw * weights) / math.fsum(weights)
    values = np.zeros(n)
    values[cells] = raw
    h = float(cell)
    norm = math.sqrt(math.fsum(raw**2 * weights) * h)
    measure = weight_measure(w, support)
    target = 0.999 * measure**-0.5
    if norm > 0:
        values *= target / norm
    return Atom(support, values)


def random_decomposition(
    rng: np.random.Generator, w: MeshWeight1D, terms: int = 5
) -> AtomicDecomposition:
    pairs = [(float(rng.standard_normal()), random_atom(rng, w)) for _ in range(terms)]
    return AtomicDecomposition.of(w.domain, pairs)


def random_function_2d(
    rng: np.random.Generator, domains: tuple[Domain, Domain], kind: str = "noise"
) -> MeshFunction2D:
    """Random 2D function: "noise", or "blocks" (random rectangle indicators)."""
    shape = (domains[0].n_cells, domains[1].n_cells)
    if kind == "noise":
        return MeshFunction2D(domains, rng.standard_normal(shape))
    if kind == "blocks":
        values = np.zeros(shape)
        for _ in range(3):
            x0, y0 = rng.integers(0, shape[0]), rng.integers(0, shape[1])
            x1, y1 = rng.integers(x0 + 1, shape[0] + 1), rng.integers(y0 + 1, shape[1] + 1)
            values[x0:x1, y0:y1] += rng.standard_normal()
        return MeshFunction2D(domains, values)
    raise DomainError(f"Unsupported 2D function kind: {kind}")


def tensor_weight(u: MeshWeight1D, v: MeshWeight1D) -> MeshWeight2D:
    """ω(x, y) = u(x)·v(y)."""
    return MeshWeight2D((u.domain, v.domain), np.outer(u.values, v.values))


def staircase(
    rng: np.random.Generator, domains: tuple[Domain, Domain], steps: int = 3
) -> OpenSetApprox:
    """Staircase region: rectangles [0, a_k) x [b_(k-1), b_k) with decreasing widths."""
    d1, d2 = domains
    n1, n2 = d1.n_cells, d2.n_cells
    widths = np.sort(rng.integers(1, n1 + 1, size=steps))[::-1]
    cuts = np.sort(rng.choice(np.arange(1, n2), size=min(steps - 1, n2 - 1), replace=False))
    bounds = np.concatenate([[0], cuts, [n2]])
    rectangles = []
    for k in range(len(bounds) - 1):
        q1 = ArbitraryInterval(d1.left, int(widths[min(k, steps - 1)]) * d1.cell_length, d1)
        q2 = ArbitraryInterval(
            d2.left + int(bounds[k]) * d2.cell_length,
            int(bounds[k + 1] - bounds[k]) * d2.cell_length,
            d2,
        )
        rectangles.append(MeshRectangle(q1, q2))
    return OpenSetApprox(domains, tuple(rectangles))
