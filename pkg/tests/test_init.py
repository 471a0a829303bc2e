"""
Tests for morselab package initialization and exports.
"""

import pytest
import os, sys
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))


class TestPackageExports:
    """Tests for main package exports."""

    def test_field_exports(self):
        """Field construction is exported."""
        from morselab import create_field, ScalarField, CatalogField, FieldRegistry
        assert callable(create_field)
        assert issubclass(CatalogField, ScalarField)
        assert FieldRegistry is not None

    def test_flow_exports(self):
        from morselab import integrate_flow, integrate_many, IntegratorConfig, Trajectory
        assert callable(integrate_flow)
        assert callable(integrate_many)
        assert IntegratorConfig().method == "DOP853"
        assert Trajectory is not None

    def test_analysis_exports(self):
        from morselab import estimate_lojasiewicz, z_set_crossings, dense_limit_survey, lojasiewicz_threshold
        assert lojasiewicz_threshold(0.5) == 2
        assert callable(estimate_lojasiewicz)
        assert callable(z_set_crossings)
        assert callable(dense_limit_survey)

    def test_all_exports_list(self):
        """Test __all__ contains expected exports."""
        import morselab

        expected = [
            "MorselabError",
            "parse",
            "differentiate",
            "create_field",
            "integrate_flow",
            "find_critical",
            "sweep_critical",
            "find_connections",
            "bott_dimension",
            "estimate_lojasiewicz",
            "normal_bias",
            "configure_logging",
        ]

        for item in expected:
            assert item in morselab.__all__, f"{item} missing from __all__"
            assert hasattr(morselab, item)

    def test_runner_not_imported_eagerly(self):
        """The runner pulls in matplotlib and stays behind its own import."""
        import morselab
        assert "run_command" not in morselab.__all__

    def test_version(self):
        import morselab
        assert morselab.__version__ == "0.3.0"

    def test_docstring_example(self):
        from morselab import create_field, integrate_flow, estimate_lojasiewicz
        f = create_field("power_well", {"k": 2})
        traj = integrate_flow(f, [1.0])
        assert round(estimate_lojasiewicz(f, traj, [0.0], f_p=0.0).exponent, 2) == 0.75
