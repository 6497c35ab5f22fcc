#!/usr/bin/env python3
"""Tests for the command line interface and the suite runner."""

import json
from fractions import Fraction

import numpy as np
import pytest
from click.testing import CliRunner

from dyadic_grids import cli as cli_module
from dyadic_grids.cli import COVERING_LEVEL, SUITE_COUNTS, FailureDump, SuiteConfig, cli, run_suite
from dyadic_grids.errors import DomainError
from dyadic_grids.io import load_function
from dyadic_grids.mesh import MeshFunction2D, MeshWeight1D


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def invoke(runner: CliRunner, *args: str):
    return runner.invoke(cli, list(args), catch_exceptions=False)


class TestSingleCommands:
    """Test commands that print one computation."""

    def test_d_of_delta(self, runner):
        result = invoke(runner, "d-of-delta", "1/3")
        assert result.exit_code == 0
        assert result.stdout.strip() == "1/3"

        result = invoke(runner, "d-of-delta", "2/5", "--constant")
        assert result.stdout.split() == ["1/5", "10"]

    def test_rejects_decimal(self, runner):
        result = runner.invoke(cli, ["d-of-delta", "0.3"])
        assert result.exit_code == 2

    def test_cover(self, runner):
        result = invoke(runner, "cover", "--delta", "1/3", "--left", "2/5", "--len", "1/10", "--level", "3")
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["ratio"] == "5"
        assert data["interval"]["grid"] == "std"
        assert (data["interval"]["left"], data["interval"]["length"]) == ("0", "1/2")

    def test_cover_naive_prints_null(self, runner):
        result = invoke(
            runner, "cover", "--naive", "--delta", "1/3", "--left", "-1/2", "--len", "1",
            "--domain", "line", "--window", "3", "--level", "2",
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout) is None

    def test_grid_show(self, runner):
        result = invoke(
            runner, "grid", "show", "--delta", "1/3", "--n=-2",
            "--domain", "line", "--window", "2", "--level", "2",
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["offset"] == "4/3"
        assert data["shifted"] == ["-8/3", "4/3"]
        assert data["std"] == ["-4", "0"]

    def test_bmo_needs_delta(self, runner, tmp_path):
        path = tmp_path / "f.json"
        invoke(runner, "generate", "function", "--kind", "indicator", "--level", "3", "--output", str(path))
        assert runner.invoke(cli, ["bmo", "--grid", "delta", "--input", str(path)]).exit_code == 2

        result = invoke(runner, "bmo", "--mode", "carleson", "--input", str(path))
        data = json.loads(result.stdout)
        assert data["norm"] == pytest.approx(0.5)
        assert data["mode"] == "carleson"


class TestGenerateAndVerify:
    """Test data generation and file-based verification commands."""

    def test_weights_verify(self, runner, tmp_path):
        weight = tmp_path / "w.json"
        report = tmp_path / "reports" / "a2.json"
        result = invoke(runner, "generate", "weight", "--kind", "cascade", "--level", "4", "--output", str(weight))
        assert result.exit_code == 0
        assert isinstance(load_function(weight, weight=True), MeshWeight1D)

        result = invoke(
            runner, "weights", "verify", "--class", "a2", "--delta", "1/3",
            "--input", str(weight), "--report", str(report),
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["class"] == "a2"
        assert data["pass"] is True
        assert set(data["constants"]) == {"continuous", "std", "shifted"}
        assert json.loads(report.read_text())["delta"] == "1/3"

    def test_weights_verify_unknown_class(self, runner, tmp_path):
        weight = tmp_path / "w.csv"
        invoke(runner, "generate", "weight", "--kind", "power", "--level", "3", "--output", str(weight))
        result = runner.invoke(cli, ["weights", "verify", "--class", "bmo", "--delta", "1/3", "--input", str(weight)])
        assert result.exit_code == 2

    def test_maximal_verify(self, runner, tmp_path):
        f = tmp_path / "f.json"
        w = tmp_path / "w.json"
        invoke(runner, "generate", "function", "--kind", "step", "--level", "4", "--output", str(f))
        invoke(runner, "generate", "weight", "--kind", "cascade", "--level", "4", "--output", str(w))

        result = invoke(runner, "maximal", "verify", "--delta", "1/3", "--input", str(f), "--weight", str(w))
        assert result.exit_code == 0
        assert json.loads(result.stdout)["name"] == "weighted_maximal_comparability"

        result = runner.invoke(
            cli, ["maximal", "verify", "--delta", "1/3", "--input", str(f), "--weight", str(w), "--max-cdy", "1.5"]
        )
        assert result.exit_code == 2

    def test_product_verify(self, runner, tmp_path):
        f = tmp_path / "f2.json"
        result = invoke(
            runner, "generate", "function", "--kind", "blocks", "--two-d", "--level", "2", "--output", str(f)
        )
        assert result.exit_code == 0
        assert isinstance(load_function(f), MeshFunction2D)

        result = invoke(runner, "product", "verify", "--which", "strong-maximal", "--delta", "1/3", "--input", str(f))
        assert result.exit_code == 0
        assert json.loads(result.stdout)["pass"] is True

        result = runner.invoke(cli, ["product", "verify", "--which", "weights", "--delta", "1/3"])
        assert result.exit_code == 2

    def test_two_d_kind_checked(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["generate", "function", "--kind", "haar", "--two-d", "--output", str(tmp_path / "x.json")]
        )
        assert result.exit_code == 2


class TestSuites:
    """Test suite configuration and the suite runner."""

    def test_config_validation(self):
        with pytest.raises(DomainError, match="dyadic rational"):
            SuiteConfig(deltas=(Fraction(1, 2),))
        with pytest.raises(DomainError, match="Unknown suites"):
            SuiteConfig(suites=("covering", "spectral"))
        with pytest.raises(DomainError, match="above the cap"):
            SuiteConfig(level_2d=9)
        with pytest.raises(DomainError, match="must be positive"):
            SuiteConfig(count=0)

    def test_default_counts(self):
        cfg = SuiteConfig()
        assert cfg.count_for("weights") == cfg.count_for("bmo") == 200
        assert cfg.count_for("maximal") == 50
        assert cfg.count_for("atoms") == 100
        assert cfg.count_for("vmo") == cfg.count_for("product") == 20
        assert cfg.to_json()["counts"] == SUITE_COUNTS
        assert SuiteConfig(count=3).to_json()["counts"] == {name: 3 for name in SUITE_COUNTS}

    def test_dyadic_delta_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(cli, ["verify", "weights", "--delta", "1/2", "--output-dir", str(tmp_path)])
        assert result.exit_code == 2

    def test_covering_suite(self, runner, tmp_path):
        result = invoke(
            runner, "verify", "covering", "--delta", "1/3", "--delta", "1/5",
            "--level", "4", "--window", "2", "--output-dir", str(tmp_path),
        )
        assert result.exit_code == 0
        document = json.loads((tmp_path / "covering.json").read_text())
        assert document["pass"] is True
        assert {r["name"] for r in document["reports"]} == {
            "cover_soundness",
            "separation",
            "shift_necessity",
        }
        assert document["config"]["deltas"] == ["1/3", "1/5"]
        # --level 4 is raised to the exhaustive covering level
        soundness = next(r for r in document["reports"] if r["name"] == "cover_soundness")
        n_cells = 2**COVERING_LEVEL
        assert soundness["checks"] == n_cells * (n_cells - 1) + 1
        assert json.loads((tmp_path / "summary.json").read_text())["suites"] == {"covering": True}
        assert (tmp_path / "constants.csv").read_text().startswith("name")

    @pytest.mark.slow
    def test_all_suites_small(self, tmp_path):
        cfg = SuiteConfig(
            deltas=(Fraction(1, 3),),
            level=4,
            level_2d=2,
            window=1,
            count=2,
            omegas=3,
            jobs=2,
            output_dir=tmp_path,
        )
        assert run_suite(cfg) == 0
        for name in cfg.suites:
            assert json.loads((tmp_path / f"{name}.json").read_text())["pass"] is True
        assert not (tmp_path / "failures").exists()

    def test_product_suite_uses_one_weight_per_function(self, tmp_path, monkeypatch):
        seen = []
        check = cli_module.product_weight_check

        def recording(w, p, delta):
            seen.append(w.values.copy())
            return check(w, p, delta)

        monkeypatch.setattr(cli_module, "product_weight_check", recording)
        cfg = SuiteConfig(deltas=(Fraction(1, 3),), level_2d=2, count=3, omegas=2, output_dir=tmp_path)
        reports = cli_module._product_suite(cfg, FailureDump(tmp_path / "failures"))
        assert len(seen) == 3
        assert not any(np.array_equal(seen[0], other) for other in seen[1:])
        weighted = next(r for r in reports if r.name == "weighted_strong_maximal")
        assert weighted.passed
        assert weighted.checks == 3 * 3 * 4 * 4

    @pytest.mark.slow
    def test_parallel_runs_are_reproducible(self, tmp_path):
        def run_into(directory):
            cfg = SuiteConfig(
                deltas=(Fraction(1, 3), Fraction(2, 5)),
                level=4,
                level_2d=2,
                window=1,
                count=2,
                omegas=3,
                jobs=2,
                output_dir=directory,
            )
            assert run_suite(cfg) == 0
            return cfg

        cfg = run_into(tmp_path / "first")
        run_into(tmp_path / "second")
        for name in (*cfg.suites, "summary"):
            documents = [
                json.loads((tmp_path / run / f"{name}.json").read_text())
                for run in ("first", "second")
            ]
            for document in documents:
                document.pop("generated_at")
            assert documents[0] == documents[1], name
        csv = [(tmp_path / run / "constants.csv").read_text() for run in ("first", "second")]
        assert csv[0] == csv[1]
