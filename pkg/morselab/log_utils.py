"""
Loggers for morselab.

Every module logs through `get_logger(__name__)`, so one
`configure_logging` call sets the level for the whole lab. The level
defaults to MORSELAB_LOG_LEVEL, falling back to WARNING; `morselab -v`
raises it to INFO.
"""

import logging
import os
import sys
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
ROOT_LOGGER_NAME = "morselab"
LEVEL_ENV_VAR = "MORSELAB_LOG_LEVEL"

_configured = False


def get_logger(name: str) -> logging.Logger:
    """Logger for a module, placed under the `morselab` hierarchy."""
    if not name.startswith(ROOT_LOGGER_NAME):
        name = f"{ROOT_LOGGER_NAME}.{name}"
    if not _configured:
        configure_logging()
    return logging.getLogger(name)


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.WARNING)


def configure_logging(level: Optional[str] = None, force: bool = False) -> logging.Logger:
    """
    Attach one stderr handler to the morselab root logger.

    Args:
        level: Level name; None reads MORSELAB_LOG_LEVEL, then WARNING
        force: Replace an earlier configuration
    """
    global _configured

    root = logging.getLogger(ROOT_LOGGER_NAME)
    if _configured and not force:
        return root

    root.setLevel(_level(level or os.environ.get(LEVEL_ENV_VAR) or "WARNING"))
    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False

    _configured = True
    return root


def set_level(level: str) -> None:
    logging.getLogger(ROOT_LOGGER_NAME).setLevel(_level(level))
