"""
Analytic models of critical submanifolds.

Catalog fields declare their critical sets through these models. Each model
knows its nearest-point projection and an orthonormal tangent/normal split at
every point, which is all the normal-bias and secant analyses need.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Sequence

import numpy as np

from .exceptions import InputError


class CriticalManifoldModel(ABC):
    """
    A critical submanifold N of R^n described in closed form.

    Attributes:
        ambient: Dimension n of the surrounding space
        dimension: Dimension of N
        periodic_parameter: Period of `parameter` for closed curves, else None
    """

    ambient: int
    dimension: int
    periodic_parameter: Optional[float] = None

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest point of N to x."""

    @abstractmethod
    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        """Orthonormal basis of T_pN as columns of an (n, dimension) array."""

    @abstractmethod
    def normal_basis(self, p: np.ndarray) -> np.ndarray:
        """Orthonormal basis of the normal space as columns of an (n, n - dimension) array."""

    @abstractmethod
    def mesh(self, count: int, lower: float = -1.0, upper: float = 1.0) -> np.ndarray:
        """`count` evenly spaced points of N, shape (count, n). Bounds apply to unbounded N."""

    def parameter(self, p: np.ndarray) -> float:
        """Scalar coordinate along a one-dimensional N."""
        raise NotImplementedError(f"{type(self).__name__} has no scalar parametrization")

    def tangent_projector(self, p: np.ndarray) -> np.ndarray:
        basis = self.tangent_basis(p)
        return basis @ basis.T

    def normal_projector(self, p: np.ndarray) -> np.ndarray:
        basis = self.normal_basis(p)
        return basis @ basis.T

    def distance(self, x: np.ndarray) -> float:
        x = self._check(x)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, p: np.ndarray, tol: float = 1e-4) -> bool:
        return self.distance(p) <= tol

    def describe(self) -> Dict[str, Any]:
        return {"kind": type(self).__name__, "dimension": self.dimension, "ambient": self.ambient}

    def _check(self, x: Sequence[float]) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.ambient,):
            raise InputError(
                f"Expected a point of length {self.ambient}, got shape {arr.shape}",
                parameter="x",
            )
        return arr


class PointManifold(CriticalManifoldModel):
    """An isolated critical point viewed as a 0-dimensional manifold."""

    dimension = 0

    def __init__(self, point: Sequence[float]):
        self.point = np.asarray(point, dtype=float)
        self.ambient = self.point.size

    def project(self, x: np.ndarray) -> np.ndarray:
        self._check(x)
        return self.point.copy()

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        return np.zeros((self.ambient, 0))

    def normal_basis(self, p: np.ndarray) -> np.ndarray:
        return np.eye(self.ambient)

    def mesh(self, count: int, lower: float = -1.0, upper: float = 1.0) -> np.ndarray:
        return np.tile(self.point, (max(count, 1), 1))

    def describe(self) -> Dict[str, Any]:
        return {**super().describe(), "point": self.point.tolist()}


class AxisLine(CriticalManifoldModel):
    """A coordinate axis {t * e_axis} of R^n."""

    dimension = 1

    def __init__(self, ambient: int, axis: int):
        if not 0 <= axis < ambient:
            raise InputError(f"Axis {axis} out of range for R^{ambient}", parameter="axis")
        self.ambient = ambient
        self.axis = axis

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        out = np.zeros(self.ambient)
        out[self.axis] = x[self.axis]
        return out

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        return np.eye(self.ambient)[:, [self.axis]]

    def normal_basis(self, p: np.ndarray) -> np.ndarray:
        others = [i for i in range(self.ambient) if i != self.axis]
        return np.eye(self.ambient)[:, others]

    def mesh(self, count: int, lower: float = -1.0, upper: float = 1.0) -> np.ndarray:
        out = np.zeros((count, self.ambient))
        out[:, self.axis] = np.linspace(lower, upper, count)
        return out

    def parameter(self, p: np.ndarray) -> float:
        return float(np.asarray(p, dtype=float)[self.axis])

    def describe(self) -> Dict[str, Any]:
        return {**super().describe(), "axis": self.axis}


class UnitCircle(CriticalManifoldModel):
    """The circle |x| = radius in R^2."""

    ambient = 2
    dimension = 1
    periodic_parameter = 2.0 * np.pi

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise InputError("Circle radius must be positive", parameter="radius")
        self.radius = float(radius)

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        r = np.linalg.norm(x)
        if r == 0.0:
            # every point of the circle is nearest; pick angle 0
            return np.array([self.radius, 0.0])
        return self.radius * x / r

    def _unit(self, p: np.ndarray) -> np.ndarray:
        p = self._check(p)
        r = np.linalg.norm(p)
        return p / r if r > 0 else np.array([1.0, 0.0])

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        u = self._unit(p)
        return np.array([[-u[1]], [u[0]]])

    def normal_basis(self, p: np.ndarray) -> np.ndarray:
        u = self._unit(p)
        return u.reshape(2, 1)

    def mesh(self, count: int, lower: float = -1.0, upper: float = 1.0) -> np.ndarray:
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return self.radius * np.column_stack([np.cos(angles), np.sin(angles)])

    def parameter(self, p: np.ndarray) -> float:
        p = np.asarray(p, dtype=float)
        return float(np.mod(np.arctan2(p[1], p[0]), 2.0 * np.pi))

    def describe(self) -> Dict[str, Any]:
        return {**super().describe(), "radius": self.radius}
