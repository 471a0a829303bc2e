"""
Tests for the morselab command-line interface.
"""

import json
import pytest
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

click = pytest.importorskip("click")
from click.testing import CliRunner

from morselab.cli import cli
from morselab.runner import OUTPUT_DIR_ENV_VAR
from morselab.runner.report import REPORT_FILE, SUMMARY_FILE


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestHelp:
    """Tests for the command group."""

    def test_help_lists_commands(self, runner):
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("flow", "critical", "connections", "loja", "verify", "report", "fields"):
            assert command in result.output

    def test_config_option_required(self, runner):
        result = runner.invoke(cli, ["flow"])
        assert result.exit_code == 2
        assert "--config" in result.output


class TestExperimentCommands:
    """Tests for the config-driven subcommands."""

    def test_flow_passes(self, runner, tmp_path):
        config = _write(tmp_path, "field: {catalog: power_well}\nstarts: {points: [[1.0]]}\n")
        out = tmp_path / "out"
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "PASS" in result.output
        assert (out / REPORT_FILE).is_file()
        assert (out / "trajectory_000.csv").is_file()

    def test_output_dir_from_env(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("MORSELAB_OUTPUT_DIR", str(tmp_path / "env-out"))
        config = _write(tmp_path, "field: {catalog: trough}\nstarts: {points: [[1.0, 0.0]]}\n")
        result = runner.invoke(cli, ["flow", "--config", config])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "env-out" / REPORT_FILE).is_file()

    def test_seed_option_overrides(self, runner, tmp_path):
        config = _write(
            tmp_path,
            "field: {catalog: quadratic}\nstarts: {random: {count: 2, lower: [-1, -1], upper: [1, 1]}}\n",
        )
        out = tmp_path / "out"
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(out), "--seed", "3", "--workers", "2"])
        assert result.exit_code == 0, result.output
        report = json.loads((out / REPORT_FILE).read_text())
        assert report["config"]["seed"] == 3
        assert report["config"]["workers"] == 2

    def test_missing_seed_is_config_error(self, runner, tmp_path):
        config = _write(
            tmp_path,
            "field: {catalog: quadratic}\nstarts: {random: {count: 2, lower: [-1, -1], upper: [1, 1]}}\n",
        )
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "seed" in result.output

    def test_schema_error_reports_position(self, runner, tmp_path):
        config = _write(tmp_path, "field:\n  catalog: trough\nintegrator:\n  rel_tol: -1.0\n")
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "line 4, column 12" in result.output
        assert config in result.output

    def test_unknown_field(self, runner, tmp_path):
        config = _write(tmp_path, "field: {catalog: nowhere}\nstarts: {points: [[1.0]]}\n")
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "nowhere" in result.output

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["flow", "--config", str(tmp_path / "absent.yaml")])
        assert result.exit_code == 2

    def test_bad_expression(self, runner, tmp_path):
        config = _write(tmp_path, "field: {expression: 'x + * y', variables: [x, y]}\nstarts: {points: [[1.0, 0.0]]}\n")
        result = runner.invoke(cli, ["flow", "--config", config, "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "offset 4" in result.output

    def test_failed_verdicts_exit_one(self, runner, tmp_path):
        config = _write(tmp_path, "field: {catalog: power_well, params: {k: 2}}\nstarts: {points: [[0.0]]}\n")
        result = runner.invoke(cli, ["loja", "--config", config, "--out", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "FAIL" in result.output


class TestReportCommand:
    """Tests for `morselab report`."""

    def test_regenerates_summaries(self, runner, tmp_path):
        config = _write(tmp_path, "field: {catalog: power_well}\nstarts: {points: [[1.0]]}\n")
        out = tmp_path / "runs" / "flow"
        runner.invoke(cli, ["flow", "--config", config, "--out", str(out)])
        (out / SUMMARY_FILE).unlink()
        result = runner.invoke(cli, ["report", "--out", str(tmp_path / "runs")])
        assert result.exit_code == 0, result.output
        assert (out / SUMMARY_FILE).is_file()
        assert SUMMARY_FILE in result.output

    def test_no_reports(self, runner, tmp_path):
        result = runner.invoke(cli, ["report", "--out", str(tmp_path)])
        assert result.exit_code == 2

    def test_unreadable_report(self, runner, tmp_path):
        (tmp_path / REPORT_FILE).write_text("{not json")
        result = runner.invoke(cli, ["report", "--out", str(tmp_path)])
        assert result.exit_code == 2

    def test_default_directory_from_env(self, runner, tmp_path, monkeypatch):
        """Without --out the directory comes from MORSELAB_OUTPUT_DIR, as for the run commands."""
        config = _write(tmp_path, "field: {catalog: power_well}\nstarts: {points: [[1.0]]}\n")
        out = tmp_path / "env-out"
        monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(out))
        runner.invoke(cli, ["flow", "--config", config])
        (out / SUMMARY_FILE).unlink()
        result = runner.invoke(cli, ["report"])
        assert result.exit_code == 0, result.output
        assert (out / SUMMARY_FILE).is_file()

    def test_missing_directory(self, runner, tmp_path):
        result = runner.invoke(cli, ["report", "--out", str(tmp_path / "absent")])
        assert result.exit_code == 2
        assert "No run_report.json" in result.output


class TestFieldsCommand:
    """Tests for `morselab fields list`."""

    def test_list_json(self, runner):
        result = runner.invoke(cli, ["fields", "list", "--json"])
        assert result.exit_code == 0
        rows = {row["name"]: row for row in json.loads(result.output)}
        assert rows["power_well"]["params"] == ["k"]
        assert rows["torus_height"]["params"] == []
        assert rows["quadratic"]["params"] == ["coefficients", "rotation"]

    def test_list_text(self, runner):
        result = runner.invoke(cli, ["fields", "list"])
        assert result.exit_code == 0
        assert "circle_well" in result.output
        assert "params: k" in result.output
