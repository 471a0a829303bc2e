"""
Tests for the catalog registry and the pluggy hooks.
"""

import pytest
import os
import sys
from importlib.metadata import EntryPoint

import numpy as np
from pydantic import Field

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from morselab.exceptions import ConfigurationError, UnknownFieldError
from morselab.fields import CatalogField, FieldRegistry, PowerWell, registry
from morselab.fields.hooks import collect_fields, get_plugin_manager, hookimpl, register_plugin


class TestFieldRegistry:
    """Tests for FieldRegistry."""

    def teardown_method(self):
        FieldRegistry.clear()

    def test_builtins_listed(self):
        """Built-in entries are registered on import."""
        names = FieldRegistry.list_names()
        for name in ["quadratic", "quad_saddle", "x4y2", "power_well", "torus_height",
                     "circle_well", "warped_bott", "trough", "linear"]:
            assert name in names
        assert names == sorted(names)

    def test_case_insensitive(self):
        """Lookups ignore case."""
        assert FieldRegistry.get("POWER_WELL") is PowerWell

    def test_unknown(self):
        """Unknown ids give None from get and an error from create."""
        assert FieldRegistry.get("bowl") is None
        with pytest.raises(UnknownFieldError) as exc:
            FieldRegistry.create("bowl")
        assert "trough" in exc.value.details["available"]

    def test_subclass_registers(self):
        """Subclassing with name= registers the entry."""

        class Bowl(CatalogField, name="bowl"):
            class Params(CatalogField.Params):
                depth: float = Field(default=1.0, gt=0)

            def __init__(self, params=None):
                super().__init__(params, dimension=2)

            def _value(self, x):
                return float(self.params.depth * (x @ x))

            def _gradient(self, x):
                return 2.0 * self.params.depth * x

            def _hessian(self, x):
                return 2.0 * self.params.depth * np.eye(2)

        assert FieldRegistry.get("bowl") is Bowl
        f = FieldRegistry.create("bowl", {"depth": 3.0})
        assert f.value([1.0, 1.0]) == 6.0
        assert f.field_id == "bowl"
        with pytest.raises(ConfigurationError):
            FieldRegistry.create("bowl", {"depth": -1.0})

    def test_abstract_subclass_skipped(self):
        """Subclasses that leave hooks abstract are not registered."""

        class Half(CatalogField, name="half"):
            def _value(self, x):
                return 0.0

        assert FieldRegistry.get("half") is None

    def test_clear_keeps_builtins(self):
        """clear() forgets plugins but keeps built-ins."""

        class Extra(PowerWell, name="extra_well"):
            pass

        assert "extra_well" in FieldRegistry.list_names()
        FieldRegistry.clear()
        assert "extra_well" not in FieldRegistry.list_names()
        assert "power_well" in FieldRegistry.list_names()

    def test_entry_point_discovery(self, monkeypatch):
        """Fields published under the morselab.fields entry-point group load lazily by name."""
        ep = EntryPoint(name="Deep_Well", value="morselab.fields.catalog:PowerWell", group=registry.ENTRY_POINT_GROUP)
        monkeypatch.setattr(registry, "entry_points", lambda group: [ep] if group == registry.ENTRY_POINT_GROUP else [])
        FieldRegistry.clear()
        assert "deep_well" in FieldRegistry.list_names()
        assert FieldRegistry.get("deep_well") is PowerWell


class TestHooks:
    """Tests for the pluggy extension point."""

    def teardown_method(self):
        FieldRegistry.clear()

    def test_register_plugin(self):
        """Classes returned by the hook are registered."""

        class Shifted(PowerWell, register=False):
            catalog_name = "shifted_well"

        class Plugin:
            @hookimpl
            def morselab_register_fields(self):
                return [Shifted]

        assert FieldRegistry.get("shifted_well") is None
        assert register_plugin(Plugin()) == 1
        assert FieldRegistry.get("shifted_well") is Shifted

    def test_collect_without_plugins(self):
        """A manager without plugins contributes nothing."""
        assert collect_fields(get_plugin_manager(load_entrypoints=False)) == 0
