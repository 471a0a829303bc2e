"""
Morselab exception hierarchy.

Provides specific exception types for the failure modes of the lab,
so callers can tell a bad input apart from a flow that misbehaved.

Example:
    >>> from morselab.exceptions import InputError, CriticalPointNotFound
    >>>
    >>> try:
    ...     cp = find_critical(field, seed)
    ... except CriticalPointNotFound as e:
    ...     print(f"Newton gave up after {e.iterations} steps")
    ... except InputError as e:
    ...     print(f"Bad input: {e}")
"""

from typing import Any, Dict, Optional, Sequence


class MorselabError(Exception):
    """
    Base exception for all morselab errors.

    All morselab-specific exceptions inherit from this class,
    allowing catch-all handling:

        try:
            run_experiment(...)
        except MorselabError as e:
            log.error(f"Experiment failed: {e}")
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} (details: {self.details})"
        return self.message


# --- Input Errors ---

class InputError(MorselabError):
    """
    A precondition of an operation was violated.

    Raised for dimension mismatches, non-finite coordinates, non-positive
    step sizes, times outside a trajectory and similar caller mistakes.

    Attributes:
        parameter: Name of the offending argument, when known
    """

    def __init__(
        self,
        message: str,
        parameter: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.parameter = parameter


class ParseError(InputError):
    """
    An expression string could not be parsed.

    Attributes:
        position: Zero-based character offset of the failure
        text: The expression being parsed
    """

    def __init__(
        self,
        message: str,
        position: int,
        text: str = "",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, parameter="expression", details=details)
        self.position = position
        self.text = text

    def __str__(self) -> str:
        return f"{self.message} at offset {self.position}"


class UnknownIdentifierError(ParseError):
    """An identifier is neither a declared variable nor a known function."""

    def __init__(self, name: str, position: int, text: str = ""):
        super().__init__(f"Unknown identifier '{name}'", position, text)
        self.name = name


class UnknownFunctionError(ParseError):
    """A call names a function outside the supported set."""

    def __init__(self, name: str, position: int, text: str = ""):
        super().__init__(f"Unknown function '{name}'", position, text)
        self.name = name


# --- Numerical Errors ---

class IntegrationError(MorselabError):
    """
    The flow integrator produced a non-finite state.

    Attributes:
        time: Integration time at which the failure was detected
    """

    def __init__(
        self,
        message: str,
        time: Optional[float] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.time = time


class CriticalPointNotFound(MorselabError):
    """
    Newton iteration diverged or hit its iteration cap.

    Attributes:
        seed: Starting point of the search
        iterations: Number of iterations performed
    """

    def __init__(
        self,
        message: str,
        seed: Optional[Sequence[float]] = None,
        iterations: int = 0,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.seed = list(seed) if seed is not None else None
        self.iterations = iterations


class UnsupportedError(MorselabError):
    """The operation is not defined for this input (e.g. a degenerate critical point)."""
    pass


class InsufficientDataError(MorselabError):
    """
    Too few valid samples for a fit.

    Attributes:
        available: Number of usable samples
        required: Minimum number needed
    """

    def __init__(
        self,
        message: str = "Not enough samples to fit",
        available: int = 0,
        required: int = 8,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.available = available
        self.required = required

    def __str__(self) -> str:
        return f"{self.message} ({self.available} available, {self.required} required)"


# --- Configuration Errors ---

class ConfigurationError(MorselabError):
    """Invalid experiment configuration."""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, details)
        self.config_key = config_key


class ConfigSyntaxError(ConfigurationError):
    """
    Config file is unreadable or fails schema validation at a known position.

    Attributes:
        line: One-based line number, when known
        column: One-based column number, when known
    """

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message, config_key, details)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"line {self.line}"
            if self.column is not None:
                where += f", column {self.column}"
            where += ": "
        key = f"[{self.config_key}] " if self.config_key else ""
        return f"{where}{key}{self.message}"


class UnknownFieldError(ConfigurationError):
    """A catalog id does not name a registered field."""

    def __init__(self, field_id: str, available: Optional[Sequence[str]] = None):
        details = {"available": sorted(available)} if available else None
        super().__init__(f"Unknown catalog field '{field_id}'", "field.catalog", details)
        self.field_id = field_id


__all__ = [
    # Base
    "MorselabError",

    # Input
    "InputError",
    "ParseError",
    "UnknownIdentifierError",
    "UnknownFunctionError",

    # Numerical
    "IntegrationError",
    "CriticalPointNotFound",
    "UnsupportedError",
    "InsufficientDataError",

    # Config
    "ConfigurationError",
    "ConfigSyntaxError",
    "UnknownFieldError",
]
