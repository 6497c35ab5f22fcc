"""
Tools subpackage for dyadic-grids: test data generators, report tables and plots.

Plots need matplotlib, available via the 'tools' extra.

Install with visualization tools:
    pip install dyadic-grids[tools]

Without visualization tools:
    pip install dyadic-grids

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

from typing import Callable

# Always available tools (no extra dependencies)
from .generators import (
    finite_haar,
    generate_function,
    generate_weight,
    haar_function,
    random_atom,
    random_decomposition,
    random_function_2d,
    staircase,
    step_function,
    tensor_weight,
)
from .reporting import constant_rows, present_results

# Matplotlib-dependent tools with graceful fallback
try:
    import matplotlib  # noqa: F401

    from .plot import plot_grids, plot_maximal, plot_weight

    _HAS_VISUALIZATION = True
except ImportError:
    _HAS_VISUALIZATION = False

    def _visualization_unavailable(name: str) -> Callable[..., None]:
        """Factory for creating unavailable visualization function stubs."""

        def _stub(*args: object, **kwargs: object) -> None:
            raise ImportError(
                f"Visualization function '{name}' requires matplotlib. "
                f"Install with: pip install dyadic-grids[tools]"
            )

        return _stub

    plot_weight = _visualization_unavailable("plot_weight")
    plot_maximal = _visualization_unavailable("plot_maximal")
    plot_grids = _visualization_unavailable("plot_grids")

__all__ = [
    "HAS_VISUALIZATION",
    # Generators
    "finite_haar",
    "generate_function",
    "generate_weight",
    "haar_function",
    "random_atom",
    "random_decomposition",
    "random_function_2d",
    "staircase",
    "step_function",
    "tensor_weight",
    # Reporting
    "constant_rows",
    "present_results",
    # Visualization (stubs without matplotlib)
    "plot_grids",
    "plot_maximal",
    "plot_weight",
]

HAS_VISUALIZATION = _HAS_VISUALIZATION
