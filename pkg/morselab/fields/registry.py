"""
Catalog registry with lazy entry-point discovery.

Built-in catalog fields register themselves when `morselab.fields.catalog`
is imported. Third-party packages add fields either through the
`morselab.fields` entry-point group or through the pluggy hook in
`morselab.fields.hooks`.

Example:
    >>> FieldRegistry.list_names()
    ['circle_well', 'linear', 'power_well', ...]
    >>> f = FieldRegistry.create("power_well", {"k": 2})

Example pyproject.toml for a plugin package:
    [tool.poetry.plugins."morselab.fields"]
    my_well = "my_package.fields:MyWell"
"""

import warnings
from importlib.metadata import EntryPoint, entry_points
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional, Set, Type

from ..exceptions import ConfigurationError, UnknownFieldError
from ..log_utils import get_logger

if TYPE_CHECKING:
    from .catalog import CatalogField

logger = get_logger(__name__)

ENTRY_POINT_GROUP = "morselab.fields"


class FieldRegistry:
    """
    Registry of catalog field classes, keyed by lowercase catalog id.

    Entry points are stored unloaded and imported on first `get`.
    """

    _entry_points: Dict[str, "EntryPoint"] = {}
    _loaded: Dict[str, Type["CatalogField"]] = {}
    _builtin: Dict[str, Type["CatalogField"]] = {}
    _discovered: bool = False

    @classmethod
    def register(cls, name: str, field_cls: Type["CatalogField"], builtin: bool = False) -> None:
        """
        Register a catalog field class.

        Args:
            name: Catalog id
            field_cls: The CatalogField subclass
            builtin: Survives `clear()` when True
        """
        key = name.lower()
        cls._loaded[key] = field_cls
        if builtin:
            cls._builtin[key] = field_cls

    @classmethod
    def get(cls, name: str) -> Optional[Type["CatalogField"]]:
        """Catalog class by id, loading its entry point if needed; None when unknown."""
        key = name.lower()
        if not cls._discovered:
            cls.discover()

        if key in cls._loaded:
            return cls._loaded[key]

        ep = cls._entry_points.get(key)
        if ep is not None:
            return cls._load_entry_point(ep, key)
        return None

    @classmethod
    def _load_entry_point(cls, ep: "EntryPoint", name: str) -> Optional[Type["CatalogField"]]:
        try:
            field_cls = ep.load()
        except Exception as e:
            warnings.warn(f"Failed to load catalog field '{name}' from entry point: {e}", UserWarning)
            return None
        cls._loaded[name] = field_cls
        return field_cls

    @classmethod
    def list_names(cls) -> List[str]:
        """Sorted catalog ids without loading entry points."""
        if not cls._discovered:
            cls.discover()
        names: Set[str] = set(cls._loaded) | set(cls._entry_points)
        return sorted(names)

    @classmethod
    def create(cls, name: str, params: Optional[Mapping[str, Any]] = None) -> "CatalogField":
        """
        Instantiate a catalog field.

        Raises:
            UnknownFieldError: No field registered under `name`
            ConfigurationError: Parameters fail the entry's schema
        """
        field_cls = cls.get(name)
        if field_cls is None:
            raise UnknownFieldError(name, cls.list_names())
        try:
            return field_cls(params or {})
        except ConfigurationError:
            raise
        except ValueError as e:
            raise ConfigurationError(
                f"Invalid parameters for '{name}': {e}", config_key="field.params"
            ) from e

    @classmethod
    def clear(cls, keep_builtins: bool = True) -> None:
        """Forget registered fields. Built-ins are kept unless asked otherwise."""
        cls._entry_points.clear()
        cls._loaded.clear()
        if keep_builtins:
            cls._loaded.update(cls._builtin)
        else:
            cls._builtin.clear()
        cls._discovered = False

    @classmethod
    def discover(cls, force: bool = False) -> int:
        """
        Collect entry points of the `morselab.fields` group and fields
        contributed by pluggy plugins of the `morselab.plugins` group.

        Returns:
            Number of entry points known after discovery
        """
        if cls._discovered and not force:
            return len(cls._entry_points)

        try:
            eps = entry_points(group=ENTRY_POINT_GROUP)
        except Exception as e:  # broken metadata in an unrelated distribution
            logger.debug("Entry point scan failed: %s", e)
            eps = []

        for ep in eps:
            cls._entry_points[ep.name.lower()] = ep

        cls._discovered = True
        from .hooks import collect_fields, get_plugin_manager

        try:
            added = collect_fields(get_plugin_manager())
        except Exception as e:
            warnings.warn(f"Failed to load catalog plugins: {e}", UserWarning)
        else:
            if added:
                logger.debug("Plugins registered %d catalog field(s)", added)

        return len(cls._entry_points)
