"""
Tests for the config-driven experiment commands.
"""

import json
import pytest
import os
import sys

import pandas as pd

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.exceptions import ConfigurationError
from morselab.runner import RunReport, TheoremTag, parse_config, run_command
from morselab.runner.report import REPORT_FILE, SUMMARY_FILE

TORUS = """\
field: {catalog: torus_height}
sweep:
  lower: [0.0, 0.0]
  upper: [6.283185307179586, 6.283185307179586]
  grid: [6, 6]
"""


def _run(command, text, out):
    report = run_command(command, parse_config(text), out)
    assert (out / REPORT_FILE).is_file()
    assert (out / SUMMARY_FILE).is_file()
    assert report.missing_artifacts(out) == []
    return report


class TestRunCommand:
    """Tests for run_command dispatch."""

    def test_unknown_command(self, tmp_path):
        with pytest.raises(ConfigurationError) as exc:
            run_command("plot", parse_config(""), tmp_path)
        assert "verify" in exc.value.details["available"]

    @pytest.mark.parametrize("command", ["flow", "critical", "connections", "loja"])
    def test_field_required(self, tmp_path, command):
        with pytest.raises(ConfigurationError):
            run_command(command, parse_config(""), tmp_path)

    def test_verify_needs_seed(self, tmp_path):
        with pytest.raises(ConfigurationError):
            run_command("verify", parse_config(""), tmp_path)


class TestFlowCommand:
    """Tests for the flow command."""

    def test_power_well(self, tmp_path):
        text = "field: {catalog: power_well, params: {k: 1}}\nstarts: {points: [[1.0], [-0.5]]}\n"
        report = _run("flow", text, tmp_path)
        assert report.passed
        assert {v.tag for v in report.verdicts} == {TheoremTag.DISSIPATION, TheoremTag.INTEGRATOR}
        assert sorted(report.artifacts) == ["flows.json", "trajectory_000.csv", "trajectory_001.csv"]
        frame = pd.read_csv(tmp_path / "trajectory_000.csv")
        assert list(frame.columns) == ["t", "x_1", "f", "grad_norm", "arc_length"]
        flows = json.loads((tmp_path / "flows.json").read_text())
        assert len(flows["trajectories"]) == 2

    def test_report_round_trip(self, tmp_path):
        text = "field: {catalog: trough}\nstarts: {points: [[1.0, 0.0]]}\n"
        report = _run("flow", text, tmp_path)
        assert RunReport.load(tmp_path / REPORT_FILE) == report
        assert parse_config(json.dumps(report.config)) == parse_config(text)

    def test_byte_identical_reruns(self, tmp_path):
        text = (
            "field: {catalog: quadratic}\n"
            "starts: {random: {count: 3, lower: [-1, -1], upper: [1, 1]}}\n"
            "seed: 4\n"
        )
        _run("flow", text, tmp_path / "a")
        _run("flow", text, tmp_path / "b")
        for name in ("trajectory_000.csv", "trajectory_002.csv", "flows.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestCriticalCommands:
    """Tests for the critical and connections commands."""

    def test_critical_torus(self, tmp_path):
        report = _run("critical", TORUS, tmp_path)
        assert report.passed
        assert [v.tag for v in report.verdicts] == [TheoremTag.CLASSIFICATION]
        frame = pd.read_csv(tmp_path / "critical_points.csv")
        assert sorted(frame["index"]) == [0, 1, 1, 2]

    def test_sweep_required(self, tmp_path):
        with pytest.raises(ConfigurationError) as exc:
            run_command("critical", parse_config("field: {catalog: torus_height}\n"), tmp_path)
        assert exc.value.config_key == "sweep"

    def test_connections_torus(self, tmp_path):
        report = _run("connections", TORUS + "workers: 2\n", tmp_path)
        assert report.passed
        tags = {v.tag for v in report.verdicts}
        assert {TheoremTag.CONNECTIONS, TheoremTag.LEVEL_CROSSING, TheoremTag.RESTRICTION} <= tags
        data = json.loads((tmp_path / "connections.json").read_text())
        assert data["unresolved"] == []
        assert (tmp_path / "connections" / "connection_000.csv").is_file()


class TestLojaCommand:
    """Tests for the loja command."""

    def test_power_well_analyses(self, tmp_path):
        text = (
            "field: {catalog: power_well, params: {k: 2}}\n"
            "starts: {points: [[0.9]]}\n"
            "loja: {analyses: [lojasiewicz, tail_length, envelope, zset]}\n"
        )
        report = _run("loja", text, tmp_path)
        assert report.passed, [v for v in report.verdicts if not v.passed]
        data = json.loads((tmp_path / "loja.json").read_text())
        entry = data["trajectories"][0]
        assert entry["f_p"] == 0.0
        assert entry["lojasiewicz"]["exponent"] == pytest.approx(0.75, abs=0.02)
        assert entry["zset"]["k"] == 3
        assert "trajectory_000_loja.svg" in report.artifacts

    def test_trough_manifold_analyses(self, tmp_path):
        text = (
            "field: {catalog: trough}\n"
            "starts: {points: [[1.0, 0.3]]}\n"
            "loja:\n"
            "  analyses: [decay, bias, secant, distance]\n"
            "  distance_samples: [[0.1, 0.0], [0.2, 0.5], [0.3, 0.1], [0.4, 0.0],\n"
            "                     [0.5, 0.2], [0.6, 0.0], [0.7, 0.9], [0.8, 0.0]]\n"
        )
        report = _run("loja", text, tmp_path)
        assert report.passed, [v for v in report.verdicts if not v.passed]
        assert {TheoremTag.EXPONENTIAL, TheoremTag.NORMAL_BIAS, TheoremTag.SECANT, TheoremTag.DISTANCE} <= report.tags

    def test_manifold_analyses_need_catalog_manifold(self, tmp_path):
        text = (
            "field: {expression: x^2, variables: [x]}\n"
            "starts: {points: [[1.0]]}\n"
            "loja: {analyses: [bias]}\n"
        )
        with pytest.raises(ConfigurationError) as exc:
            run_command("loja", parse_config(text), tmp_path)
        assert exc.value.config_key == "loja.analyses"

    def test_distance_needs_samples(self, tmp_path):
        text = "field: {catalog: trough}\nstarts: {points: [[1.0, 0.0]]}\nloja: {analyses: [distance]}\n"
        with pytest.raises(ConfigurationError):
            run_command("loja", parse_config(text), tmp_path)

    def test_analysis_errors_become_failed_verdicts(self, tmp_path):
        """A start at the minimum leaves nothing to fit."""
        text = "field: {catalog: power_well, params: {k: 2}}\nstarts: {points: [[0.0]]}\n"
        report = _run("loja", text, tmp_path)
        assert not report.passed
        assert report.errors
