#!/usr/bin/env python3
"""
Static plots of weights, maximal functions and grid diagrams.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

from fractions import Fraction
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.axes import Axes
from matplotlib.figure import Figure

from dyadic_grids.exact import format_rational, parse_rational
from dyadic_grids.grids import Domain, GridSpec, endpoint_sets
from dyadic_grids.maximal_hardy import hl_maximal
from dyadic_grids.mesh import ContinuousFamily, MeshFunction1D, MeshWeight1D
from dyadic_grids.weights import dyadic_doubling


def _cell_edges(domain: Domain) -> np.ndarray:
    return float(domain.left) + float(domain.cell_length) * np.arange(domain.n_cells + 1)


def _finish(fig: Figure, output: str | Path | None) -> None:
    if output is None:
        plt.show()
    else:
        fig.savefig(output, dpi=120)
        plt.close(fig)


def plot_weight(
    w: MeshWeight1D, delta: Fraction | str | None = None, output: str | Path | None = None
) -> None:
    """
    Plot a weight as a step function, marking the intervals where the dyadic
    doubling constants are attained.

    Args:
        w: Weight on a mesh domain
        delta: Shift of the second grid; only the standard grid without it
        output: File to write instead of showing the figure
    """
    if not len(w.values):
        print("Warning: Empty weight provided for plotting")
        return

    fig, ax = plt.subplots(figsize=(10, 4))
    ax.stairs(w.values, _cell_edges(w.domain), color="tab:blue", label="w")
    grids = [GridSpec.standard(w.domain)]
    if delta is not None:
        grids.append(GridSpec.shifted(w.domain, parse_rational(delta)))
    for grid, color in zip(grids, ("tab:green", "tab:red")):
        value, interval_id = dyadic_doubling(w, grid)
        if interval_id is not None:
            ax.axvspan(
                float(interval_id.left),
                float(interval_id.right),
                color=color,
                alpha=0.15,
                label=f"{grid.label} doubling {value:.3g}",
            )
    ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_title(f"Weight on {w.domain}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _finish(fig, output)


def plot_maximal(
    f: MeshFunction1D, delta: Fraction | str, output: str | Path | None = None
) -> None:
    """Plot |f| with its continuous maximal function and both grid maximal functions."""
    delta = parse_rational(delta)
    domain = f.domain
    standard = GridSpec.standard(domain)
    shifted = GridSpec.shifted(domain, delta)
    edges = _cell_edges(domain)

    fig, (top, bottom) = plt.subplots(2, 1, figsize=(10, 7), sharex=True)
    top.stairs(np.abs(f.values), edges, color="gray", label="|f|")
    top.stairs(hl_maximal(f, ContinuousFamily.for_delta(domain, delta)).values, edges, label="M")
    top.stairs(hl_maximal(f, standard).values, edges, label="M_d")
    top.stairs(hl_maximal(f, shifted).values, edges, label=f"M_{format_rational(delta)}")
    top.set_title("Maximal functions")
    top.legend()
    top.grid(True, alpha=0.3)

    levels = range(domain.coarsest_level, min(domain.finest_level, 5) + 1)
    _plot_grid_rows(bottom, domain, delta, levels)
    fig.tight_layout()
    _finish(fig, output)


def plot_grids(
    domain: Domain, delta: Fraction | str, levels: range, output: str | Path | None = None
) -> None:
    """Diagram of the standard and shifted endpoint sets, one row per level."""
    delta = parse_rational(delta)
    fig, ax = plt.subplots(figsize=(10, 1 + 0.5 * len(levels)))
    _plot_grid_rows(ax, domain, delta, levels)
    fig.tight_layout()
    _finish(fig, output)


def _plot_grid_rows(ax: Axes, domain: Domain, delta: Fraction, levels: range) -> None:
    grids = (GridSpec.standard(domain), GridSpec.shifted(domain, delta))
    for row, n in enumerate(levels):
        standard, shifted = endpoint_sets(grids, n)
        ax.plot([float(x) for x in standard], [row] * len(standard), "|", color="tab:green", ms=12)
        ax.plot([float(x) for x in shifted], [row] * len(shifted), "|", color="tab:red", ms=12)
    ax.set_yticks(range(len(levels)), [f"n={n}" for n in levels])
    ax.set_xlim(float(domain.left), float(domain.right))
    ax.set_xlabel("x")
    ax.set_title(f"Endpoints of D (green) and D^{format_rational(delta)} (red)")
