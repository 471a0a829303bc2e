"""
Scalar fields: the abstraction, the built-in catalog and expression-backed fields.
"""

from typing import Any, Mapping, Optional, Sequence

from .base import (
    Domain,
    DomainKind,
    ReversedField,
    ScalarField,
    evaluate,
    finite_diff_gradient,
    gradient,
    hessian,
)
from .catalog import (
    BUILTIN_FIELDS,
    CatalogField,
    CircleWell,
    DeclaredCritical,
    Linear,
    PowerWell,
    QuadSaddle,
    Quadratic,
    ReferenceFacts,
    TorusHeight,
    Trough,
    WarpedBott,
    X4Y2,
)
from .expression import ExpressionField
from .registry import FieldRegistry
from ..exceptions import ConfigurationError


def create_field(
    catalog: Optional[str] = None,
    params: Optional[Mapping[str, Any]] = None,
    expression: Optional[str] = None,
    variables: Optional[Sequence[str]] = None,
    domain: Optional[Domain] = None,
) -> ScalarField:
    """
    Build a field from a catalog id or from an expression.

    Example:
        >>> create_field("power_well", {"k": 3})
        >>> create_field(expression="x^2 - y^2", variables=["x", "y"])

    Raises:
        UnknownFieldError: Unknown catalog id
        ConfigurationError: Both or neither source given, or bad parameters
    """
    if (catalog is None) == (expression is None):
        raise ConfigurationError(
            "Exactly one of a catalog id or an expression is required", config_key="field"
        )
    if catalog is not None:
        return FieldRegistry.create(catalog, params)
    if not variables:
        raise ConfigurationError("An expression needs its variable names", config_key="field.variables")
    return ExpressionField(expression, variables, domain)


__all__ = [
    "ScalarField",
    "ReversedField",
    "Domain",
    "DomainKind",
    "ExpressionField",
    "CatalogField",
    "ReferenceFacts",
    "DeclaredCritical",
    "FieldRegistry",
    "BUILTIN_FIELDS",
    "Quadratic",
    "QuadSaddle",
    "X4Y2",
    "PowerWell",
    "TorusHeight",
    "CircleWell",
    "WarpedBott",
    "Trough",
    "Linear",
    "create_field",
    "evaluate",
    "gradient",
    "hessian",
    "finite_diff_gradient",
]
