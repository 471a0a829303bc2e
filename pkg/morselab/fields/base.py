"""
Scalar-field abstraction.

A `ScalarField` is an immutable smooth function on R^n or on a flat torus
with exact gradient and Hessian. Subclasses implement the unchecked
`_value` / `_gradient` / `_hessian` hooks; the public methods validate the
point and symmetrize the Hessian.

Example:
    >>> from morselab.fields import create_field, gradient
    >>> f = create_field("x4y2")
    >>> gradient(f, [1.0, 1.0, 0.0])
    array([4., 2., 0.])
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import InputError


class DomainKind(StrEnum):
    """Supported domains. Both carry the Euclidean (flat) metric."""
    EUCLIDEAN = "euclidean"
    FLAT_TORUS = "flat_torus"


@dataclass(frozen=True)
class Domain:
    """
    Where a field lives.

    Torus states are stored unwrapped in R^n; `wrap`, `displacement` and
    `distance` apply the periods when comparing points.
    """

    kind: DomainKind = DomainKind.EUCLIDEAN
    periods: Optional[Tuple[float, ...]] = None

    @classmethod
    def euclidean(cls) -> "Domain":
        return cls()

    @classmethod
    def torus(cls, periods: Sequence[float]) -> "Domain":
        periods = tuple(float(p) for p in periods)
        if not periods or any(not np.isfinite(p) or p <= 0 for p in periods):
            raise InputError("Torus periods must be positive and finite", parameter="periods")
        return cls(DomainKind.FLAT_TORUS, periods)

    @property
    def is_periodic(self) -> bool:
        return self.kind == DomainKind.FLAT_TORUS

    def wrap(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.is_periodic:
            return x
        return np.mod(x, np.asarray(self.periods))

    def displacement(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """b - a, using the minimum image on a torus."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.is_periodic:
            periods = np.asarray(self.periods)
            d = d - periods * np.round(d / periods)
        return d

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.linalg.norm(self.displacement(a, b)))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": str(self.kind), "periods": list(self.periods) if self.periods else None}


class ScalarField(ABC):
    """
    Base class for smooth scalar fields f: R^n -> R.

    Attributes:
        dimension: Number of coordinates n
        domain: Euclidean space or flat torus
        field_id: Catalog id or a short description, used in artifacts
        variable_names: Coordinate names, used as CSV column hints
    """

    def __init__(
        self,
        dimension: int,
        domain: Optional[Domain] = None,
        field_id: str = "",
        variable_names: Optional[Sequence[str]] = None,
    ):
        if dimension < 1:
            raise InputError("Field dimension must be positive", parameter="dimension")
        self.dimension = int(dimension)
        self.domain = domain or Domain.euclidean()
        if self.domain.is_periodic and len(self.domain.periods or ()) != self.dimension:
            raise InputError("One torus period per coordinate is required", parameter="periods")
        self.field_id = field_id or type(self).__name__.lower()
        self.variable_names = tuple(variable_names or (f"x{i + 1}" for i in range(self.dimension)))

    @abstractmethod
    def _value(self, x: np.ndarray) -> float:
        """f(x) for an already validated point."""

    @abstractmethod
    def _gradient(self, x: np.ndarray) -> np.ndarray:
        """Exact gradient for an already validated point."""

    @abstractmethod
    def _hessian(self, x: np.ndarray) -> np.ndarray:
        """Exact Hessian for an already validated point."""

    def check_point(self, x: Sequence[float]) -> np.ndarray:
        """Coerce x to a float vector of the right length with finite entries."""
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.dimension,):
            raise InputError(
                f"Expected a point of dimension {self.dimension}, got shape {arr.shape}",
                parameter="x",
            )
        if not np.all(np.isfinite(arr)):
            raise InputError("Point has non-finite coordinates", parameter="x")
        return arr

    def value(self, x: Sequence[float]) -> float:
        return float(self._value(self.check_point(x)))

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        return np.asarray(self._gradient(self.check_point(x)), dtype=float).reshape(self.dimension)

    def hessian(self, x: Sequence[float]) -> np.ndarray:
        h = np.asarray(self._hessian(self.check_point(x)), dtype=float).reshape(
            self.dimension, self.dimension
        )
        return 0.5 * (h + h.T)

    def describe(self) -> Dict[str, Any]:
        return {
            "field_id": self.field_id,
            "dimension": self.dimension,
            "domain": self.domain.to_dict(),
            "variables": list(self.variable_names),
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(field_id={self.field_id!r}, dimension={self.dimension})"


class ReversedField(ScalarField):
    """The field -f. Its forward flow traces the backward flow of f."""

    def __init__(self, field: ScalarField):
        super().__init__(field.dimension, field.domain, f"-{field.field_id}", field.variable_names)
        self.inner = field

    def _value(self, x: np.ndarray) -> float:
        return -self.inner._value(x)

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return -np.asarray(self.inner._gradient(x), dtype=float)

    def _hessian(self, x: np.ndarray) -> np.ndarray:
        return -np.asarray(self.inner._hessian(x), dtype=float)


def evaluate(field: ScalarField, x: Sequence[float]) -> float:
    """
    f(x).

    Raises:
        InputError: Dimension mismatch or non-finite coordinates
    """
    return field.value(x)


def gradient(field: ScalarField, x: Sequence[float]) -> np.ndarray:
    """Exact Euclidean gradient of f at x."""
    return field.gradient(x)


def hessian(field: ScalarField, x: Sequence[float]) -> np.ndarray:
    """Exact, symmetric Hessian of f at x."""
    return field.hessian(x)


def finite_diff_gradient(field: ScalarField, x: Sequence[float], h: float) -> np.ndarray:
    """
    Central-difference gradient, accurate to O(h^2).

    Only used as an oracle for the exact derivatives.

    Raises:
        InputError: h not positive, or an invalid point
    """
    if not np.isfinite(h) or h <= 0:
        raise InputError(f"Step size must be positive, got {h}", parameter="h")
    x = field.check_point(x)
    out = np.empty(field.dimension)
    for i in range(field.dimension):
        step = np.zeros(field.dimension)
        step[i] = h
        out[i] = (field._value(x + step) - field._value(x - step)) / (2.0 * h)
    return out
