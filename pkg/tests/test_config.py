"""
Tests for experiment configuration loading and validation.
"""

import pytest
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.exceptions import ConfigSyntaxError, ConfigurationError, UnknownFieldError
from morselab.fields import DomainKind
from morselab.runner import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_ENV_VAR,
    ExperimentConfig,
    load_config,
    parse_config,
)

BASIC = """\
field:
  catalog: power_well
  params: {k: 2}
integrator:
  rel_tol: 1.0e-9
starts:
  points: [[1.0], [-0.5]]
"""


class TestParseConfig:
    """Tests for parse_config."""

    def test_basic(self):
        cfg = parse_config(BASIC)
        assert cfg.field.catalog == "power_well"
        assert cfg.integrator.rel_tol == 1e-9
        assert cfg.seed is None
        assert cfg.workers == 1
        field = cfg.field.build()
        assert field.field_id == "power_well"
        assert field.params.k == 2

    def test_empty_document(self):
        cfg = parse_config("")
        assert cfg.field is None

    def test_expression_field(self):
        cfg = parse_config(
            "field:\n"
            "  expression: cos(x) + cos(y)\n"
            "  variables: [x, y]\n"
            "  domain_kind: flat_torus\n"
        )
        field = cfg.field.build()
        assert field.domain.kind == DomainKind.FLAT_TORUS
        assert field.value([0.0, 0.0]) == pytest.approx(2.0)

    def test_catalog_id_case_insensitive(self):
        cfg = parse_config("field: {catalog: Power_Well}\n")
        assert cfg.field.build().field_id == "power_well"

    def test_malformed_yaml_position(self):
        with pytest.raises(ConfigSyntaxError) as exc:
            parse_config("field:\n  catalog: [power_well\n")
        assert exc.value.line is not None
        assert exc.value.column is not None
        assert "Malformed YAML" in str(exc.value)

    def test_schema_error_position(self):
        text = "field:\n  catalog: trough\nintegrator:\n  rel_tol: -1.0\n"
        with pytest.raises(ConfigSyntaxError) as exc:
            parse_config(text)
        assert exc.value.config_key == "integrator.rel_tol"
        assert exc.value.line == 4
        assert exc.value.column == 12
        assert "line 4, column 12" in str(exc.value)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigSyntaxError) as exc:
            parse_config("field: {catalog: trough}\nbogus: 1\n")
        assert exc.value.config_key == "bogus"
        assert exc.value.line == 2

    def test_not_a_mapping(self):
        with pytest.raises(ConfigSyntaxError) as exc:
            parse_config("- 1\n- 2\n")
        assert exc.value.line == 1

    def test_unknown_catalog_field(self):
        with pytest.raises(UnknownFieldError) as exc:
            parse_config("field: {catalog: no_such_field}\n")
        assert exc.value.config_key == "field.catalog"
        assert "power_well" in exc.value.details["available"]

    @pytest.mark.parametrize("field_block", [
        "field: {catalog: trough, expression: x}\n",
        "field: {expression: x^2}\n",
        "field: {catalog: trough, variables: [x]}\n",
    ])
    def test_inconsistent_field_block(self, field_block):
        with pytest.raises(ConfigSyntaxError):
            parse_config(field_block)

    def test_random_starts_need_seed(self):
        text = "field: {catalog: trough}\nstarts:\n  random: {count: 3, lower: [0, 0], upper: [1, 1]}\n"
        with pytest.raises(ConfigSyntaxError, match="seed"):
            parse_config(text)
        assert parse_config(text, {"seed": 5}).seed == 5

    def test_overrides_skip_none(self):
        cfg = parse_config(BASIC + "workers: 3\n", {"workers": None, "seed": None})
        assert cfg.workers == 3

    def test_override_validated(self):
        with pytest.raises(ConfigSyntaxError):
            parse_config(BASIC, {"workers": 0})


class TestExperimentConfig:
    """Tests for ExperimentConfig helpers."""

    RANDOM = BASIC.replace(
        "  points: [[1.0], [-0.5]]\n",
        "  points: [[1.0]]\n  random: {count: 4, lower: [-1.0], upper: [1.0]}\n",
    ) + "seed: 11\n"

    def test_start_points_explicit_then_random(self):
        cfg = parse_config(self.RANDOM)
        starts = cfg.start_points(1)
        assert starts.shape == (5, 1)
        assert starts[0, 0] == 1.0
        assert np.all(np.abs(starts[1:]) <= 1.0)

    def test_start_points_reproducible(self):
        a = parse_config(self.RANDOM).start_points(1)
        b = parse_config(self.RANDOM).start_points(1)
        np.testing.assert_array_equal(a, b)

    def test_start_points_dimension_mismatch(self):
        cfg = parse_config(BASIC)
        with pytest.raises(ConfigurationError) as exc:
            cfg.start_points(2)
        assert exc.value.config_key == "starts.points"

    def test_start_points_missing(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig().start_points(1)

    def test_rng_without_seed(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig().rng()

    def test_output_dir_precedence(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_DIR_ENV_VAR, raising=False)
        cfg = ExperimentConfig()
        assert str(cfg.resolve_output_dir()) == DEFAULT_OUTPUT_DIR
        monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, "/tmp/from-env")
        assert str(cfg.resolve_output_dir()) == "/tmp/from-env"
        cfg = ExperimentConfig(output_dir="from-config")
        assert str(cfg.resolve_output_dir()) == "from-config"
        assert str(cfg.resolve_output_dir("from-cli")) == "from-cli"

    def test_echo_revalidates(self):
        cfg = parse_config(self.RANDOM)
        assert ExperimentConfig.model_validate(cfg.echo()) == cfg


class TestLoadConfig:
    """Tests for load_config."""

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(BASIC)
        assert load_config(path).field.catalog == "power_well"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Cannot read config"):
            load_config(tmp_path / "missing.yaml")
