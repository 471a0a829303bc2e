"""
Pluggy hook specifications for extending the field catalog.

Example:
    >>> from morselab.fields.hooks import hookimpl, register_plugin
    >>>
    >>> class MyFields:
    ...     @hookimpl
    ...     def morselab_register_fields(self):
    ...         return [DoubleWell]
    >>>
    >>> register_plugin(MyFields())
    1
"""

from typing import Any, List, Optional, Type

import pluggy

from .registry import FieldRegistry

PROJECT_NAME = "morselab"

hookspec = pluggy.HookspecMarker(PROJECT_NAME)
hookimpl = pluggy.HookimplMarker(PROJECT_NAME)


class MorselabHookSpec:
    """Extension points of the field catalog."""

    @hookspec
    def morselab_register_fields(self) -> List[type]:
        """
        Return catalog field classes to register.

        Each class must define `catalog_name`. Classes that subclass
        CatalogField with a `name=` argument are already registered and
        may be returned anyway.
        """
        return []


def get_plugin_manager(load_entrypoints: bool = True) -> pluggy.PluginManager:
    """Plugin manager with the morselab hookspecs, optionally loading `morselab.plugins` entry points."""
    pm = pluggy.PluginManager(PROJECT_NAME)
    pm.add_hookspecs(MorselabHookSpec)
    if load_entrypoints:
        pm.load_setuptools_entrypoints("morselab.plugins")
    return pm


def register_plugin(plugin: Any, pm: Optional[pluggy.PluginManager] = None) -> int:
    """
    Register a hook plugin and add the fields it returns to the catalog.

    Returns:
        Number of field classes registered
    """
    pm = pm or get_plugin_manager(load_entrypoints=False)
    pm.register(plugin)
    return collect_fields(pm)


def collect_fields(pm: pluggy.PluginManager) -> int:
    """Call `morselab_register_fields` on every plugin and register the results."""
    count = 0
    for batch in pm.hook.morselab_register_fields():
        for field_cls in batch or []:
            name = getattr(field_cls, "catalog_name", None) or field_cls.__name__.lower()
            FieldRegistry.register(name, field_cls)
            count += 1
    return count
