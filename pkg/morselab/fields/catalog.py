"""
Catalog of analytically understood test fields.

Every entry subclasses `CatalogField` with a `name=` class argument, which
registers it with `FieldRegistry`. Entries declare a pydantic `Params` model
and expose `reference_facts()`: known critical points, critical manifolds,
the equivalent expression string and, where one exists, the closed-form flow.

Example:
    >>> f = TorusHeight()
    >>> f.value([0.0, 0.0])
    2.0
    >>> [c.index for c in f.reference_facts().critical_points]
    [2, 1, 1, 0]

Custom entries:
    >>> class DoubleWell(CatalogField, name="double_well"):
    ...     def __init__(self, params=None):
    ...         super().__init__(params, dimension=1)
    ...     def _value(self, x): return (x[0] ** 2 - 1) ** 2
    ...     ...
"""

from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, List, Mapping, Optional, Sequence, Type, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base import Domain, ScalarField
from .registry import FieldRegistry
from ..manifolds import AxisLine, CriticalManifoldModel, PointManifold, UnitCircle

ClosedForm = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class DeclaredCritical:
    """A critical point whose location and spectrum are known in closed form."""
    location: tuple
    value: float
    index: int
    nullity: int


@dataclass
class ReferenceFacts:
    """What a catalog entry knows about itself, checked against its evaluator by the tests."""
    critical_points: List[DeclaredCritical] = field(default_factory=list)
    manifolds: List[CriticalManifoldModel] = field(default_factory=list)
    expression: Optional[str] = None
    variables: List[str] = field(default_factory=list)
    closed_form: Optional[ClosedForm] = None
    morse: bool = False
    morse_bott: bool = False

    @property
    def minima(self) -> List[DeclaredCritical]:
        return [c for c in self.critical_points if c.index == 0]


def _default_names(n: int) -> List[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x{i + 1}" for i in range(n)]


def _auto_register(cls: type, name: Optional[str], register: bool) -> None:
    """Register a concrete catalog class; skips opt-outs and still-abstract bases."""
    if not register or name is None:
        return
    # __abstractmethods__ is not set yet during __init_subclass__
    for base in cls.__mro__[1:]:
        for attr_name in getattr(base, "__abstractmethods__", ()):
            if getattr(getattr(cls, attr_name, None), "__isabstractmethod__", False):
                return
    FieldRegistry.register(name, cls, builtin=cls.__module__ == __name__)


class CatalogField(ScalarField):
    """
    Base class for catalog entries.

    Subclassing with `name=` registers the entry:

        class Bowl(CatalogField, name="bowl"):
            ...

    Attributes:
        catalog_name: Registry id
        Params: pydantic model validating the entry's parameters
    """

    catalog_name: ClassVar[str] = ""

    class Params(BaseModel):
        model_config = ConfigDict(extra="forbid", frozen=True)

    def __init_subclass__(cls, name: Optional[str] = None, register: bool = True, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if name is not None:
            cls.catalog_name = name
        _auto_register(cls, name, register)

    def __init__(
        self,
        params: Optional[Union[BaseModel, Mapping[str, Any]]] = None,
        dimension: int = 1,
        domain: Optional[Domain] = None,
        variable_names: Optional[Sequence[str]] = None,
    ):
        self.params = self.coerce_params(params)
        super().__init__(
            dimension,
            domain,
            self.catalog_name or type(self).__name__.lower(),
            variable_names or _default_names(dimension),
        )

    @classmethod
    def coerce_params(cls, params: Optional[Union[BaseModel, Mapping[str, Any]]]) -> BaseModel:
        """Validate a parameter mapping against `Params`; models pass through."""
        if isinstance(params, BaseModel):
            return params
        return cls.Params(**dict(params or {}))

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(variables=list(self.variable_names))

    def describe(self):
        return {**super().describe(), "params": self.params.model_dump()}


class Quadratic(CatalogField, name="quadratic"):
    """f(x) = x^T A x with A = R diag(c) R^T. Morse whenever no coefficient is zero."""

    class Params(CatalogField.Params):
        coefficients: List[float] = Field(default_factory=lambda: [1.0, 1.0], min_length=1)
        rotation: Optional[List[List[float]]] = None

        @model_validator(mode="after")
        def _check_rotation(self) -> "Quadratic.Params":
            if self.rotation is None:
                return self
            r = np.asarray(self.rotation, dtype=float)
            n = len(self.coefficients)
            if r.shape != (n, n):
                raise ValueError(f"rotation must be {n}x{n}")
            if not np.allclose(r.T @ r, np.eye(n), atol=1e-10):
                raise ValueError("rotation must be orthogonal")
            return self

    def __init__(self, params=None):
        params = self.coerce_params(params)
        coeffs = np.asarray(params.coefficients, dtype=float)
        n = coeffs.size
        super().__init__(params, dimension=n)
        self.coefficients = coeffs
        self.rotation = (
            np.eye(n) if self.params.rotation is None else np.asarray(self.params.rotation, dtype=float)
        )
        self.matrix = self.rotation @ np.diag(coeffs) @ self.rotation.T
        self.matrix = 0.5 * (self.matrix + self.matrix.T)

    def _value(self, x):
        return float(x @ self.matrix @ x)

    def _gradient(self, x):
        return 2.0 * self.matrix @ x

    def _hessian(self, x):
        return 2.0 * self.matrix

    def _flow(self, x0: np.ndarray, t: float) -> np.ndarray:
        local = self.rotation.T @ np.asarray(x0, dtype=float)
        return self.rotation @ (local * np.exp(-2.0 * self.coefficients * t))

    def _expression(self) -> str:
        names = self.variable_names
        terms = []
        for i in range(self.dimension):
            for j in range(i, self.dimension):
                a = self.matrix[i, j] * (1.0 if i == j else 2.0)
                if a == 0.0:
                    continue
                monomial = f"{names[i]}^2" if i == j else f"{names[i]}*{names[j]}"
                terms.append(f"{float(a)!r}*{monomial}")
        return " + ".join(terms) if terms else "0"

    def reference_facts(self) -> ReferenceFacts:
        origin = tuple([0.0] * self.dimension)
        index = int(np.sum(self.coefficients < 0))
        nullity = int(np.sum(self.coefficients == 0))
        return ReferenceFacts(
            critical_points=[DeclaredCritical(origin, 0.0, index, nullity)],
            manifolds=[PointManifold(origin)] if nullity == 0 else [],
            expression=self._expression(),
            variables=list(self.variable_names),
            closed_form=self._flow,
            morse=nullity == 0,
            morse_bott=nullity == 0,
        )


class QuadSaddle(CatalogField, name="quad_saddle"):
    """f(x, y) = -x^2 + y^2, the index-1 Morse normal form."""

    def __init__(self, params=None):
        super().__init__(params, dimension=2)

    def _value(self, x):
        return float(-x[0] ** 2 + x[1] ** 2)

    def _gradient(self, x):
        return np.array([-2.0 * x[0], 2.0 * x[1]])

    def _hessian(self, x):
        return np.diag([-2.0, 2.0])

    @staticmethod
    def _flow(x0: np.ndarray, t: float) -> np.ndarray:
        return np.array([x0[0] * np.exp(2.0 * t), x0[1] * np.exp(-2.0 * t)])

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(
            critical_points=[DeclaredCritical((0.0, 0.0), 0.0, 1, 0)],
            manifolds=[PointManifold((0.0, 0.0))],
            expression="-x^2 + y^2",
            variables=["x", "y"],
            closed_form=self._flow,
            morse=True,
            morse_bott=True,
        )


class X4Y2(CatalogField, name="x4y2"):
    """f(x, y, z) = x^4 + y^2 on R^3. Critical set is the z-axis, degenerate in x."""

    def __init__(self, params=None):
        super().__init__(params, dimension=3)

    def _value(self, x):
        return float(x[0] ** 4 + x[1] ** 2)

    def _gradient(self, x):
        return np.array([4.0 * x[0] ** 3, 2.0 * x[1], 0.0])

    def _hessian(self, x):
        return np.diag([12.0 * x[0] ** 2, 2.0, 0.0])

    @staticmethod
    def _flow(x0: np.ndarray, t: float) -> np.ndarray:
        x, y, z = (float(v) for v in x0)
        return np.array([x / np.sqrt(1.0 + 8.0 * x * x * t), y * np.exp(-2.0 * t), z])

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(
            critical_points=[
                DeclaredCritical((0.0, 0.0, 0.0), 0.0, 0, 2),
                DeclaredCritical((0.0, 0.0, 5.0), 0.0, 0, 2),
            ],
            manifolds=[AxisLine(3, axis=2)],
            expression="x^4 + y^2",
            variables=["x", "y", "z"],
            closed_form=self._flow,
        )


class PowerWell(CatalogField, name="power_well"):
    """f(x) = x^(2k) on R. Degenerate at 0 for k >= 2; Lojasiewicz exponent (2k-1)/(2k)."""

    class Params(CatalogField.Params):
        k: int = Field(default=1, ge=1, le=12)

    def __init__(self, params=None):
        super().__init__(params, dimension=1)
        self.k = self.params.k

    def _value(self, x):
        return float(x[0] ** (2 * self.k))

    def _gradient(self, x):
        k = self.k
        return np.array([2.0 * k * x[0] ** (2 * k - 1)])

    def _hessian(self, x):
        k = self.k
        return np.array([[2.0 * k * (2 * k - 1) * x[0] ** (2 * k - 2)]])

    def _flow(self, x0: np.ndarray, t: float) -> np.ndarray:
        x = float(np.asarray(x0, dtype=float)[0])
        if self.k == 1 or x == 0.0:
            return np.array([x * np.exp(-2.0 * t)])
        m = 2 * self.k - 2
        inv = abs(x) ** (-m) + 2.0 * self.k * m * t
        return np.array([np.sign(x) * inv ** (-1.0 / m)])

    def reference_facts(self) -> ReferenceFacts:
        nullity = 0 if self.k == 1 else 1
        return ReferenceFacts(
            critical_points=[DeclaredCritical((0.0,), 0.0, 0, nullity)],
            manifolds=[PointManifold((0.0,))],
            expression=f"x^{2 * self.k}",
            variables=["x"],
            closed_form=self._flow,
            morse=self.k == 1,
            morse_bott=self.k == 1,
        )


class TorusHeight(CatalogField, name="torus_height"):
    """f(x, y) = cos x + cos y on the flat torus (R / 2 pi Z)^2."""

    def __init__(self, params=None):
        super().__init__(params, dimension=2, domain=Domain.torus([2.0 * np.pi, 2.0 * np.pi]))

    def _value(self, x):
        return float(np.cos(x[0]) + np.cos(x[1]))

    def _gradient(self, x):
        return np.array([-np.sin(x[0]), -np.sin(x[1])])

    def _hessian(self, x):
        return np.diag([-np.cos(x[0]), -np.cos(x[1])])

    @staticmethod
    def _flow(x0: np.ndarray, t: float) -> np.ndarray:
        # each coordinate solves u' = sin u, i.e. tan(u/2) grows like e^t
        x0 = np.asarray(x0, dtype=float)
        turns = np.round(x0 / (2.0 * np.pi))
        r = x0 - 2.0 * np.pi * turns
        return 2.0 * np.pi * turns + 2.0 * np.arctan(np.tan(r / 2.0) * np.exp(t))

    def reference_facts(self) -> ReferenceFacts:
        pi = float(np.pi)
        return ReferenceFacts(
            critical_points=[
                DeclaredCritical((0.0, 0.0), 2.0, 2, 0),
                DeclaredCritical((0.0, pi), 0.0, 1, 0),
                DeclaredCritical((pi, 0.0), 0.0, 1, 0),
                DeclaredCritical((pi, pi), -2.0, 0, 0),
            ],
            manifolds=[PointManifold((pi, pi))],
            expression="cos(x) + cos(y)",
            variables=["x", "y"],
            closed_form=self._flow,
            morse=True,
            morse_bott=True,
        )


class CircleWell(CatalogField, name="circle_well"):
    """f(x, y) = (x^2 + y^2 - 1)^2. Morse-Bott minimum along the unit circle, maximum at 0."""

    def __init__(self, params=None):
        super().__init__(params, dimension=2)

    def _value(self, x):
        return float((x @ x - 1.0) ** 2)

    def _gradient(self, x):
        return 4.0 * (x @ x - 1.0) * x

    def _hessian(self, x):
        return 4.0 * (x @ x - 1.0) * np.eye(2) + 8.0 * np.outer(x, x)

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(
            critical_points=[
                DeclaredCritical((0.0, 0.0), 1.0, 2, 0),
                DeclaredCritical((1.0, 0.0), 0.0, 0, 1),
                DeclaredCritical((0.0, 1.0), 0.0, 0, 1),
            ],
            manifolds=[UnitCircle(1.0)],
            expression="(x^2 + y^2 - 1)^2",
            variables=["x", "y"],
            morse_bott=True,
        )


class WarpedBott(CatalogField, name="warped_bott"):
    """f(y, z) = (1 + z^2) y^2. Critical manifold the z-axis with z-dependent normal Hessian."""

    def __init__(self, params=None):
        super().__init__(params, dimension=2, variable_names=["y", "z"])

    def _value(self, x):
        y, z = x
        return float((1.0 + z * z) * y * y)

    def _gradient(self, x):
        y, z = x
        return np.array([2.0 * (1.0 + z * z) * y, 2.0 * z * y * y])

    def _hessian(self, x):
        y, z = x
        return np.array([[2.0 * (1.0 + z * z), 4.0 * z * y], [4.0 * z * y, 2.0 * y * y]])

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(
            critical_points=[
                DeclaredCritical((0.0, 0.0), 0.0, 0, 1),
                DeclaredCritical((0.0, 1.0), 0.0, 0, 1),
            ],
            manifolds=[AxisLine(2, axis=1)],
            expression="(1 + z^2) * y^2",
            variables=["y", "z"],
            morse_bott=True,
        )


class Trough(CatalogField, name="trough"):
    """f(y, z) = y^2. The z-axis is a critical line and z is conserved by the flow."""

    def __init__(self, params=None):
        super().__init__(params, dimension=2, variable_names=["y", "z"])

    def _value(self, x):
        return float(x[0] ** 2)

    def _gradient(self, x):
        return np.array([2.0 * x[0], 0.0])

    def _hessian(self, x):
        return np.diag([2.0, 0.0])

    @staticmethod
    def _flow(x0: np.ndarray, t: float) -> np.ndarray:
        return np.array([x0[0] * np.exp(-2.0 * t), x0[1]])

    def reference_facts(self) -> ReferenceFacts:
        return ReferenceFacts(
            critical_points=[
                DeclaredCritical((0.0, 0.0), 0.0, 0, 1),
                DeclaredCritical((0.0, -3.0), 0.0, 0, 1),
            ],
            manifolds=[AxisLine(2, axis=1)],
            expression="y^2",
            variables=["y", "z"],
            closed_form=self._flow,
            morse_bott=True,
        )


class Linear(CatalogField, name="linear"):
    """f(x) = a . x. No critical points; finite differences are exact up to rounding."""

    class Params(CatalogField.Params):
        coefficients: List[float] = Field(default_factory=lambda: [1.0, 1.0], min_length=1)

        @field_validator("coefficients")
        @classmethod
        def _finite(cls, v: List[float]) -> List[float]:
            if not all(np.isfinite(v)):
                raise ValueError("coefficients must be finite")
            return v

    def __init__(self, params=None):
        params = self.coerce_params(params)
        super().__init__(params, dimension=len(params.coefficients))
        self.coefficients = np.asarray(params.coefficients, dtype=float)

    def _value(self, x):
        return float(self.coefficients @ x)

    def _gradient(self, x):
        return self.coefficients.copy()

    def _hessian(self, x):
        return np.zeros((self.dimension, self.dimension))

    def reference_facts(self) -> ReferenceFacts:
        terms = [f"{float(a)!r}*{name}" for a, name in zip(self.coefficients, self.variable_names)]
        return ReferenceFacts(
            expression=" + ".join(terms),
            variables=list(self.variable_names),
            morse=True,
        )


BUILTIN_FIELDS: List[Type[CatalogField]] = [
    Quadratic, QuadSaddle, X4Y2, PowerWell, TorusHeight, CircleWell, WarpedBott, Trough, Linear,
]
