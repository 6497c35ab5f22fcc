#!/usr/bin/env python3
"""
Command line front end: single computations, test data generation and the
verification suites.

Copyright (c) 2025 ROX Automation - Jev Kuznetsov
"""

import functools
import json
import logging
import threading
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, TypeVar

import click
import numpy as np

from dyadic_grids.covering import (
    ArbitraryInterval,
    cover,
    cover_naive,
    verify_cover_soundness,
    verify_separation,
    verify_shift_necessity,
)
from dyadic_grids.errors import (
    DomainError,
    PreconditionError,
    ResolutionError,
    VerificationError,
)
from dyadic_grids.exact import covering_constant, format_rational, parse_rational, relative_distance
from dyadic_grids.grids import Domain, GridSpec, endpoint_sets
from dyadic_grids.haar import (
    DEFAULT_K_CAP,
    BMOMode,
    bmo_continuous,
    bmo_dyadic,
    carleson_norm,
    check_parseval,
    dyadic_vmo_moduli,
    haar_transform,
    verify_bmo_intersection,
    verify_carleson_chain,
    verify_vmo_tails,
)
from dyadic_grids.io import (
    MeshData,
    load_function,
    report_document,
    save_function,
    write_constants_csv,
    write_report,
)
from dyadic_grids.maximal_hardy import (
    atom_conditions,
    atom_rescale,
    verify_decomposition,
    verify_maximal_comparability,
)
from dyadic_grids.mesh import (
    ContinuousFamily,
    MeshFunction1D,
    MeshFunction2D,
    MeshWeight1D,
    MeshWeight2D,
)
from dyadic_grids.product import (
    LEVEL_CAP,
    GridPair,
    check_parseval_2d,
    h1_bmo_pairing,
    product_h1_dyadic_norm,
    product_weight_check,
    verify_product_bmo,
    verify_strong_maximal_comparability,
    verify_weighted,
)
from dyadic_grids.tools.generators import (
    finite_haar,
    generate_function,
    generate_weight,
    random_atom,
    random_decomposition,
    random_function_2d,
    staircase,
    step_function,
    tensor_weight,
)
from dyadic_grids.tools.reporting import constant_rows, present_results
from dyadic_grids.verification import VerificationReport, merge_reports
from dyadic_grids.version import __version__
from dyadic_grids.weights import (
    WeightClass,
    WeightFunctionals,
    generate_dyadic_doubling,
    measured_cdy,
    rh1_ainfty_relation,
    verify_intersection,
)

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s (%(filename)s:%(lineno)s)"

SUITES = ("covering", "weights", "bmo", "vmo", "maximal", "product")
DEFAULT_DELTAS = (Fraction(1, 3), Fraction(1, 5), Fraction(2, 5), Fraction(1, 7))
# random inputs per suite when --count is not given
SUITE_COUNTS = {"weights": 200, "bmo": 200, "vmo": 20, "maximal": 50, "atoms": 100, "product": 20}
# exhaustive cover soundness runs on at least this torus level
COVERING_LEVEL = 10
WEIGHT_CLASSES = ("a1", "a2", "a4", "ainf", "rh2", "rhinf", "rh1", "doubling")


@dataclass(frozen=True)
class SuiteConfig:
    """Parameters of a verification run, validated before any computation."""

    deltas: tuple[Fraction, ...] = DEFAULT_DELTAS
    level: int = 8
    level_2d: int = 4
    window: int = 6
    seed: int = 7
    suites: tuple[str, ...] = SUITES
    count: int | None = None
    omegas: int = 100
    ratio_bound: float = 3.0
    k_cap: float = DEFAULT_K_CAP
    level_cap_2d: int = LEVEL_CAP
    jobs: int = 1
    output_dir: Path = field(default_factory=lambda: Path("reports"))

    def __post_init__(self) -> None:
        if not self.deltas:
            raise DomainError("At least one delta is required")
        for delta in self.deltas:
            # raises for dyadic rationals and values outside (0, 1)
            covering_constant(delta)
        unknown = set(self.suites) - set(SUITES)
        if unknown:
            raise DomainError(f"Unknown suites: {sorted(unknown)}")
        if self.level < 1 or self.level_2d < 1:
            raise DomainError(f"Levels must be >= 1, got {self.level} and {self.level_2d}")
        if self.level_2d > self.level_cap_2d:
            raise DomainError(
                f"2D level {self.level_2d} above the cap {self.level_cap_2d}"
            )
        if self.window < 0:
            raise DomainError(f"Window level must be >= 0, got {self.window}")
        if (self.count is not None and self.count < 1) or self.omegas < 1 or self.jobs < 1:
            raise DomainError("count, omegas and jobs must be positive")
        if self.ratio_bound < 1:
            raise DomainError(f"Ratio bound must be >= 1, got {self.ratio_bound}")

    def to_json(self) -> dict[str, Any]:
        return {
            "deltas": [format_rational(d) for d in self.deltas],
            "level": self.level,
            "level_2d": self.level_2d,
            "window": self.window,
            "seed": self.seed,
            "suites": list(self.suites),
            "counts": {name: self.count_for(name) for name in SUITE_COUNTS},
            "omegas": self.omegas,
            "ratio_bound": self.ratio_bound,
            "k_cap": self.k_cap,
        }

    def count_for(self, name: str) -> int:
        """Random inputs for one suite (or "atoms"): the override, else the suite default."""
        return self.count if self.count is not None else SUITE_COUNTS[name]


class FailureDump:
    """Writes the inputs of failed checks next to the reports."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory
        self._lock = threading.Lock()

    def record(self, report: VerificationReport, **inputs: MeshData) -> VerificationReport:
        if report.passed:
            return report
        paths = {}
        with self._lock:
            for name, data in inputs.items():
                index = len(list(self.directory.glob(f"{report.name}_*_{name}.json")))
                path = self.directory / f"{report.name}_{index}_{name}.json"
                paths[name] = str(save_function(path, data))
        log.warning("%s failed, inputs written to %s", report.name, paths)
        return replace(report, details={**report.details, "dump": paths})


def _covering_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    reports = []
    torus = Domain.torus(max(cfg.level, COVERING_LEVEL))
    for delta in cfg.deltas:
        reports.append(verify_cover_soundness(torus, delta))
        reports.append(verify_separation(delta, range(-10, 11)))
        reports.append(verify_shift_necessity(delta, cfg.window))
    return reports


def _weights_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    domain = Domain.torus(cfg.level)
    classes = [WeightClass.parse(name) for name in WEIGHT_CLASSES]
    per_class: dict[tuple[Fraction, str], list[VerificationReport]] = {
        (delta, c.label): [] for delta in cfg.deltas for c in classes
    }
    relations = []
    for i in range(cfg.count_for("weights")):
        w = generate_dyadic_doubling(cfg.seed * 1000 + i, domain, cfg.ratio_bound)
        # one cache per weight, shared by every delta
        functionals = WeightFunctionals(w)
        relations.append(dump.record(rh1_ainfty_relation(w, functionals=functionals), weight=w))
        for delta in cfg.deltas:
            cdy = measured_cdy(w, delta, functionals=functionals)
            for weight_class in classes:
                report = verify_intersection(w, delta, weight_class, cdy, functionals)
                per_class[(delta, weight_class.label)].append(dump.record(report, weight=w))
    reports = [merge_reports("rh1_ainfty", relations)]
    reports.extend(merge_reports(f"weights_{label}", rs) for (_, label), rs in per_class.items())
    return reports


def _bmo_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    domain = Domain.torus(cfg.level)
    rng = np.random.default_rng(cfg.seed)
    functions = [finite_haar(rng, domain, terms=8) for _ in range(cfg.count_for("bmo"))]
    standard = GridSpec.standard(domain)
    chain = [dump.record(verify_carleson_chain(f, standard), function=f) for f in functions]
    parseval = [dump.record(check_parseval(f, standard), function=f) for f in functions]
    reports = [merge_reports("carleson_chain", chain), merge_reports("parseval_std", parseval)]
    for delta in cfg.deltas:
        shifted = GridSpec.shifted(domain, delta)
        reports.append(
            merge_reports(
                "bmo_intersection",
                (
                    dump.record(verify_bmo_intersection(f, delta, cfg.k_cap), function=f)
                    for f in functions
                ),
            )
        )
        reports.append(
            merge_reports(
                "bessel_shifted",
                (dump.record(check_parseval(f, shifted), function=f) for f in functions),
            )
        )
    return reports


def _vmo_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    window = min(cfg.window, 2)
    domain = Domain.line(window, max(1, cfg.level - 3))
    rng = np.random.default_rng(cfg.seed)
    standard = GridSpec.standard(domain)
    n_max = max(domain.finest_level - 1, window) + 1
    tails, moduli = [], []
    for _ in range(cfg.count_for("vmo")):
        f = finite_haar(rng, domain, terms=8)
        tails.append(dump.record(verify_vmo_tails(f, standard, n_max), function=f))
        full = carleson_norm(haar_transform(f, standard))[0]
        m = dyadic_vmo_moduli(f, standard, domain.finest_level - 1, domain.coarsest_level, 1)
        worst = max(m.small_scales, m.large_scales, m.far_away)
        report = VerificationReport(
            name="vmo_moduli",
            passed=worst <= full * (1 + 1e-9),
            measured=worst,
            bound=full,
            details=m.to_json(),
        )
        moduli.append(dump.record(report, function=f))
    return [merge_reports("vmo_tails", tails), merge_reports("vmo_moduli", moduli)]


def _atom_report(
    rng: np.random.Generator, w: MeshWeight1D, delta: Fraction, cdy: float
) -> VerificationReport:
    atom = random_atom(rng, w)
    try:
        rescaled = atom_rescale(atom, w, delta, cdy)
    except VerificationError as exc:
        return VerificationReport(
            "atom_rescale", False, 1.0, 0.0, delta, witness={"atom": atom, "error": str(exc)}
        )
    conditions = atom_conditions(rescaled.atom, w)
    return VerificationReport(
        "atom_rescale",
        all(conditions.values()),
        0.0,
        0.0,
        delta,
        witness={"interval": rescaled.interval},
        details={"c0": rescaled.c0, **conditions},
    )


def _maximal_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    domain = Domain.torus(cfg.level)
    rng = np.random.default_rng(cfg.seed)
    functions = [
        step_function(rng, domain, pieces=6) if i % 2 else finite_haar(rng, domain)
        for i in range(cfg.count_for("maximal"))
    ]
    n_weights = max(len(functions), cfg.count_for("atoms"))
    weights = [
        generate_dyadic_doubling(cfg.seed * 1000 + i, domain, cfg.ratio_bound)
        for i in range(n_weights)
    ]
    functionals = [WeightFunctionals(w) for w in weights]
    reports = []
    for delta in cfg.deltas:
        plain, weighted, atoms, decompositions = [], [], [], []
        cdys = [
            measured_cdy(w, delta, functionals=c)
            for w, c in zip(weights, functionals, strict=True)
        ]
        for f, w, cdy in zip(functions, weights, cdys, strict=False):
            plain.append(dump.record(verify_maximal_comparability(f, delta), function=f))
            report = verify_maximal_comparability(f, delta, w=w, cdy=cdy)
            weighted.append(dump.record(report, function=f, weight=w))
        for w, cdy in zip(weights[: cfg.count_for("atoms")], cdys, strict=False):
            atoms.append(dump.record(_atom_report(rng, w, delta, cdy), weight=w))
            d = random_decomposition(rng, w, terms=5)
            report = verify_decomposition(d, w, delta, cdy)
            decompositions.append(dump.record(report, function=d.reconstruct(), weight=w))
        reports.append(merge_reports("maximal_comparability", plain))
        reports.append(merge_reports("weighted_maximal_comparability", weighted))
        reports.append(merge_reports("atom_rescale", atoms))
        reports.append(merge_reports("h1_decomposition", decompositions))
    return reports


def _product_suite(cfg: SuiteConfig, dump: FailureDump) -> list[VerificationReport]:
    axis = Domain.torus(cfg.level_2d)
    domains = (axis, axis)
    rng = np.random.default_rng(cfg.seed)
    functions = [
        random_function_2d(rng, domains, "blocks" if i % 2 else "noise")
        for i in range(cfg.count_for("product"))
    ]
    omegas = [staircase(rng, domains) for _ in range(cfg.omegas)]
    tensors = [
        tensor_weight(
            generate_dyadic_doubling(cfg.seed * 1000 + 2 * i, axis, cfg.ratio_bound),
            generate_dyadic_doubling(cfg.seed * 1000 + 2 * i + 1, axis, cfg.ratio_bound),
        )
        for i in range(len(functions))
    ]
    reports = []
    for delta in cfg.deltas:
        pairs = GridPair.all_pairs(domains, delta)
        strong, parseval = [], []
        for f in functions:
            strong.append(dump.record(verify_strong_maximal_comparability(f, delta), function=f))
            parseval.extend(
                dump.record(check_parseval_2d(f, pair), function=f) for pair in pairs.values()
            )
        reports.append(merge_reports("strong_maximal_comparability", strong))
        reports.append(merge_reports("parseval_2d", parseval))
        f = functions[0]
        reports.append(
            merge_reports(
                "product_bmo",
                (verify_product_bmo(f, pair, omegas) for pair in pairs.values()),
            )
        )
        reports.append(
            merge_reports(
                "product_weight",
                (dump.record(product_weight_check(w, 2.0, delta), weight=w) for w in tensors),
            )
        )
        reports.append(
            merge_reports(
                "weighted_strong_maximal",
                (
                    dump.record(verify_weighted(h, w, delta), function=h, weight=w)
                    for h, w in zip(functions, tensors, strict=True)
                ),
            )
        )
        g = functions[-1]
        reports.append(
            merge_reports("h1_bmo_pairing", (h1_bmo_pairing(f, g, p) for p in pairs.values()))
        )
    return reports


SUITE_RUNNERS: dict[str, Callable[[SuiteConfig, FailureDump], list[VerificationReport]]] = {
    "covering": _covering_suite,
    "weights": _weights_suite,
    "bmo": _bmo_suite,
    "vmo": _vmo_suite,
    "maximal": _maximal_suite,
    "product": _product_suite,
}


def run_suite(cfg: SuiteConfig) -> int:
    """Run the selected suites, write one report per suite plus a summary.

    Returns:
        0 if every check passed, 1 otherwise
    """
    start = time.perf_counter()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    dump = FailureDump(cfg.output_dir / "failures")

    def run(name: str) -> list[VerificationReport]:
        log.info("running suite %s", name)
        return SUITE_RUNNERS[name](cfg, dump)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run, cfg.suites))
    else:
        results = [run(name) for name in cfg.suites]

    everything: list[VerificationReport] = []
    summary = {}
    for name, reports in zip(cfg.suites, results, strict=True):
        document = report_document(name, reports, {"config": cfg.to_json()})
        write_report(cfg.output_dir / f"{name}.json", document)
        summary[name] = document["pass"]
        everything.extend(reports)
    write_report(
        cfg.output_dir / "summary.json",
        report_document("summary", [], {"suites": summary, "config": cfg.to_json()})
        | {"pass": all(summary.values())},
    )
    write_constants_csv(cfg.output_dir / "constants.csv", constant_rows(everything))
    present_results(everything, time.perf_counter() - start)
    return 0 if all(r.passed for r in everything) else 1


# ---------------------------------------------------------------------------
# click plumbing

F = TypeVar("F", bound=Callable[..., Any])


def usage_errors(func: F) -> F:
    """Map input errors to click usage errors (exit code 2)."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (DomainError, ResolutionError, PreconditionError) as exc:
            raise click.UsageError(str(exc)) from exc

    return wrapper  # type: ignore[return-value]


class RationalType(click.ParamType):
    name = "p/q"

    def convert(
        self, value: Any, param: click.Parameter | None, ctx: click.Context | None
    ) -> Fraction:
        if isinstance(value, Fraction):
            return value
        try:
            return parse_rational(value)
        except DomainError as exc:
            self.fail(str(exc), param, ctx)


RATIONAL = RationalType()


def domain_options(func: F) -> F:
    """--domain/--level/--window options building a Domain."""
    func = click.option("--window", default=2, show_default=True, help="Line window level M")(func)
    func = click.option("--level", default=8, show_default=True, help="Finest level L")(func)
    func = click.option(
        "--domain",
        "domain_kind",
        type=click.Choice(["torus", "line"]),
        default="torus",
        show_default=True,
    )(func)
    return func


def make_domain(domain_kind: str, level: int, window: int) -> Domain:
    return Domain.torus(level) if domain_kind == "torus" else Domain.line(window, level)


def _echo_json(data: Any) -> None:
    click.echo(json.dumps(data, indent=2))


def _load_1d(path: str, weight: bool = False) -> MeshFunction1D:
    data = load_function(path, weight)
    if not isinstance(data, MeshFunction1D):
        raise DomainError(f"{path} holds 2D data, a 1D function is required")
    return data


def _load_2d(path: str, weight: bool = False) -> MeshFunction2D:
    data = load_function(path, weight)
    if not isinstance(data, MeshFunction2D):
        raise DomainError(f"{path} holds 1D data, a 2D function is required")
    return data


def _finish(report: VerificationReport, output: str | None) -> None:
    if output:
        write_report(output, report_document(report.name, [report]))
    _echo_json(report.to_json())
    if not report.passed:
        raise SystemExit(1)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging")
@click.version_option(__version__)
def cli(verbose: bool) -> None:
    """Shifted dyadic grids: coverings, weight constants, BMO and maximal functions."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        datefmt="%H:%M:%S",
    )


@cli.command("d-of-delta")
@click.argument("delta", type=RATIONAL)
@click.option("--constant", is_flag=True, help="Also print C(delta) = 2/d(delta)")
@usage_errors
def d_of_delta(delta: Fraction, constant: bool) -> None:
    """Print the relative distance d(delta) as p/q."""
    d = relative_distance(delta)
    click.echo(format_rational(d))
    if constant:
        click.echo(format_rational(covering_constant(delta)))


@cli.command("cover")
@click.option("--delta", type=RATIONAL, required=True)
@click.option("--left", type=RATIONAL, required=True)
@click.option("--len", "length", type=RATIONAL, required=True)
@click.option("--naive", is_flag=True, help="Use the plain translate, levels down to -M")
@domain_options
@usage_errors
def cover_cmd(
    delta: Fraction,
    left: Fraction,
    length: Fraction,
    naive: bool,
    domain_kind: str,
    level: int,
    window: int,
) -> None:
    """Print the covering grid interval of [left, left+len) and the exact ratio."""
    q = ArbitraryInterval(left, length, make_domain(domain_kind, level, window))
    result = cover_naive(q, delta, window) if naive else cover(q, delta)
    _echo_json(result.to_json() if result is not None else None)


@cli.group("grid")
def grid_group() -> None:
    """Grid inspection."""


@grid_group.command("show")
@click.option("--delta", type=RATIONAL, required=True)
@click.option("-n", "--n", "n", type=int, required=True, help="Grid level")
@domain_options
@usage_errors
def grid_show(delta: Fraction, n: int, domain_kind: str, level: int, window: int) -> None:
    """Print the level-n endpoint sets of D and D^delta inside the domain."""
    domain = make_domain(domain_kind, level, window)
    grids = (GridSpec.standard(domain), GridSpec.shifted(domain, delta))
    standard, shifted = endpoint_sets(grids, n)
    _echo_json(
        {
            "n": n,
            "offset": format_rational(grids[1].offset(n)),
            "std": [format_rational(x) for x in standard],
            "shifted": [format_rational(x) for x in shifted],
        }
    )


@cli.group("weights")
def weights_group() -> None:
    """Weight-class constants."""


@weights_group.command("verify")
@click.option("--class", "class_name", required=True, help="a1|a2|ainf|rh2|rhinf|rh1|doubling")
@click.option("--delta", type=RATIONAL, required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@usage_errors
def weights_verify(
    class_name: str, delta: Fraction, input_path: str, report_path: str | None
) -> None:
    """Compare continuous and grid constants of a weight against the class bound."""
    w = _load_1d(input_path, weight=True)
    assert isinstance(w, MeshWeight1D)
    weight_class = WeightClass.parse(class_name)
    report = verify_intersection(w, delta, weight_class)
    document = {
        "schema": 1,
        "class": weight_class.label,
        "delta": format_rational(delta),
        "constants": report.details["constants"],
        "paper_bound": report.bound,
        "pass": report.passed,
        "slack": report.slack,
        "report": report.to_json(),
    }
    if report_path:
        write_report(report_path, document)
    _echo_json(document)
    if not report.passed:
        raise SystemExit(1)


@cli.command("bmo")
@click.option("--mode", type=click.Choice([m.value for m in BMOMode]), default="avg")
@click.option(
    "--grid", "grid_name", type=click.Choice(["std", "delta", "continuous"]), default="std"
)
@click.option("--delta", type=RATIONAL, default=None)
@click.option("--p", "p", type=float, default=2.0, show_default=True)
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@usage_errors
def bmo_cmd(
    mode: str, grid_name: str, delta: Fraction | None, p: float, input_path: str
) -> None:
    """BMO norm of a function over one grid or the continuous family."""
    f = _load_1d(input_path)
    if grid_name == "std":
        report = bmo_dyadic(f, GridSpec.standard(f.domain), BMOMode(mode), p)
    elif delta is None:
        raise DomainError(f"--grid {grid_name} needs --delta")
    elif grid_name == "delta":
        report = bmo_dyadic(f, GridSpec.shifted(f.domain, delta), BMOMode(mode), p)
    else:
        report = bmo_continuous(f, ContinuousFamily.for_delta(f.domain, delta), p)
    _echo_json(report.to_json())


@cli.group("maximal")
def maximal_group() -> None:
    """Maximal functions."""


@maximal_group.command("verify")
@click.option("--delta", type=RATIONAL, required=True)
@click.option("--weight", "weight_path", type=click.Path(exists=True), default=None)
@click.option("--max-cdy", type=float, default=None, help="Refuse weights with larger C_dy")
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@usage_errors
def maximal_verify(
    delta: Fraction,
    weight_path: str | None,
    max_cdy: float | None,
    input_path: str,
    report_path: str | None,
) -> None:
    """Pointwise comparison of M with the two grid maximal functions."""
    f = _load_1d(input_path)
    w = _load_1d(weight_path, weight=True) if weight_path else None
    assert w is None or isinstance(w, MeshWeight1D)
    _finish(verify_maximal_comparability(f, delta, w=w, max_cdy=max_cdy), report_path)


@cli.group("product")
def product_group() -> None:
    """Two-parameter checks."""


@product_group.command("verify")
@click.option(
    "--which",
    type=click.Choice(["strong-maximal", "bmo", "weights", "h1"]),
    required=True,
)
@click.option("--delta", type=RATIONAL, required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), default=None)
@click.option("--weight", "weight_path", type=click.Path(exists=True), default=None)
@click.option("--p", "p", type=float, default=2.0, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--omegas", default=100, show_default=True, help="Random staircase open sets")
@click.option("--report", "report_path", type=click.Path(), default=None)
@usage_errors
def product_verify(
    which: str,
    delta: Fraction,
    input_path: str | None,
    weight_path: str | None,
    p: float,
    seed: int,
    omegas: int,
    report_path: str | None,
) -> None:
    """Strong maximal, product BMO, product weight and H1 pairing checks."""
    if which == "weights":
        if weight_path is None:
            raise DomainError("--which weights needs --weight")
        w = _load_2d(weight_path, weight=True)
        assert isinstance(w, MeshWeight2D)
        _finish(product_weight_check(w, p, delta), report_path)
        return
    if input_path is None:
        raise DomainError(f"--which {which} needs --input")
    f = _load_2d(input_path)
    rng = np.random.default_rng(seed)
    pairs = GridPair.all_pairs(f.domains, delta)
    if which == "strong-maximal":
        if weight_path is None:
            report = verify_strong_maximal_comparability(f, delta)
        else:
            w = _load_2d(weight_path, weight=True)
            assert isinstance(w, MeshWeight2D)
            report = verify_weighted(f, w, delta)
    elif which == "bmo":
        sets = [staircase(rng, f.domains) for _ in range(omegas)]
        report = merge_reports(
            "product_bmo", (verify_product_bmo(f, pair, sets) for pair in pairs.values())
        )
    else:
        g = random_function_2d(rng, f.domains)
        norms = {key: product_h1_dyadic_norm(f, pair) for key, pair in pairs.items()}
        report = merge_reports(
            "h1_bmo_pairing", (h1_bmo_pairing(f, g, pair) for pair in pairs.values())
        )
        report = replace(report, details={**report.details, "h1_norms": norms})
    _finish(report, report_path)


@cli.group("generate")
def generate_group() -> None:
    """Seeded test data."""


@generate_group.command("weight")
@click.option(
    "--kind", type=click.Choice(["cascade", "step", "power", "tensor"]), default="cascade"
)
@click.option("--seed", default=7, show_default=True)
@click.option("--ratio-bound", default=3.0, show_default=True)
@click.option("--exponent", default=-0.5, show_default=True, help="For --kind power")
@click.option("--output", type=click.Path(), required=True, help=".json or .csv")
@domain_options
@usage_errors
def generate_weight_cmd(
    kind: str,
    seed: int,
    ratio_bound: float,
    exponent: float,
    output: str,
    domain_kind: str,
    level: int,
    window: int,
) -> None:
    """Write a weight file; tensor weights are products of two cascades."""
    domain = make_domain(domain_kind, level, window)
    data: MeshData
    if kind == "tensor":
        u = generate_dyadic_doubling(seed, domain, ratio_bound)
        v = generate_dyadic_doubling(seed + 1, domain, ratio_bound)
        data = tensor_weight(u, v)
    else:
        data = generate_weight(kind, domain, seed, ratio_bound=ratio_bound, exponent=exponent)
    click.echo(str(save_function(output, data)))


@generate_group.command("function")
@click.option(
    "--kind",
    type=click.Choice(["haar", "step", "indicator", "noise", "blocks"]),
    default="haar",
)
@click.option("--seed", default=7, show_default=True)
@click.option("--two-d", is_flag=True, help="2D function on the square of the domain")
@click.option("--output", type=click.Path(), required=True, help=".json or .csv")
@domain_options
@usage_errors
def generate_function_cmd(
    kind: str, seed: int, two_d: bool, output: str, domain_kind: str, level: int, window: int
) -> None:
    """Write a test function file."""
    domain = make_domain(domain_kind, level, window)
    data: MeshData
    if two_d:
        if kind not in ("noise", "blocks"):
            raise DomainError(f"2D functions are noise or blocks, got {kind}")
        data = random_function_2d(np.random.default_rng(seed), (domain, domain), kind)
    else:
        data = generate_function(kind, domain, seed)
    click.echo(str(save_function(output, data)))


@cli.command("verify")
@click.argument("suite", type=click.Choice([*SUITES, "all"]))
@click.option("--delta", "deltas", type=RATIONAL, multiple=True, help="Repeatable")
@click.option("--level", default=8, show_default=True)
@click.option("--level-2d", default=4, show_default=True)
@click.option("--window", default=6, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option(
    "--count", type=int, default=None, help="Random inputs per suite [default: per-suite sizes]"
)
@click.option("--omegas", default=100, show_default=True)
@click.option("--k-cap", default=DEFAULT_K_CAP, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--output-dir", type=click.Path(), default="reports", show_default=True)
@usage_errors
def verify_cmd(
    suite: str,
    deltas: tuple[Fraction, ...],
    level: int,
    level_2d: int,
    window: int,
    seed: int,
    count: int | None,
    omegas: int,
    k_cap: float,
    jobs: int,
    output_dir: str,
) -> None:
    """Run verification suites and write JSON reports plus a constants CSV."""
    cfg = SuiteConfig(
        deltas=deltas or DEFAULT_DELTAS,
        level=level,
        level_2d=level_2d,
        window=window,
        seed=seed,
        suites=SUITES if suite == "all" else (suite,),
        count=count,
        omegas=omegas,
        k_cap=k_cap,
        jobs=jobs,
        output_dir=Path(output_dir),
    )
    code = run_suite(cfg)
    if code:
        raise SystemExit(code)


@cli.command("plot")
@click.argument("what", type=click.Choice(["weight", "maximal", "grids"]))
@click.option("--delta", type=RATIONAL, required=True)
@click.option("--input", "input_path", type=click.Path(exists=True), default=None)
@click.option("--output", type=click.Path(), default=None, help="Image file instead of a window")
@domain_options
@usage_errors
def plot_cmd(
    what: str,
    delta: Fraction,
    input_path: str | None,
    output: str | None,
    domain_kind: str,
    level: int,
    window: int,
) -> None:
    """Plot a weight, the maximal functions of a function, or the grids."""
    from dyadic_grids.tools import HAS_VISUALIZATION, plot_grids, plot_maximal, plot_weight

    if not HAS_VISUALIZATION:
        raise click.ClickException("Plots need matplotlib: pip install dyadic-grids[tools]")
    if what == "grids":
        domain = make_domain(domain_kind, level, window)
        plot_grids(domain, delta, range(domain.coarsest_level, min(level, 5) + 1), output)
        return
    if input_path is None:
        raise DomainError(f"plot {what} needs --input")
    if what == "weight":
        w = _load_1d(input_path, weight=True)
        assert isinstance(w, MeshWeight1D)
        plot_weight(w, delta, output)
    else:
        plot_maximal(_load_1d(input_path), delta, output)


if __name__ == "__main__":
    cli()
