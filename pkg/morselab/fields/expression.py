"""
Fields defined by an expression string.
"""

from typing import List, Optional, Sequence

import numpy as np

from .base import Domain, ScalarField
from ..expr import Expr, evaluate, gradient_exprs, hessian_exprs, parse


class ExpressionField(ScalarField):
    """
    A scalar field parsed from text, with symbolically derived derivatives.

    Example:
        >>> f = ExpressionField("x^4 + y^2", ["x", "y"])
        >>> f.value([2.0, 1.0])
        17.0
    """

    def __init__(
        self,
        expression: str,
        variables: Sequence[str],
        domain: Optional[Domain] = None,
        field_id: str = "",
    ):
        tree = parse(expression, variables)
        super().__init__(len(variables), domain, field_id or expression, variables)
        self.expression = expression
        self.tree: Expr = tree
        self.gradient_trees: List[Expr] = gradient_exprs(tree, self.dimension)
        self.hessian_trees: List[List[Expr]] = hessian_exprs(tree, self.dimension)

    def _value(self, x: np.ndarray) -> float:
        return float(evaluate(self.tree, x))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return np.array([evaluate(e, x) for e in self.gradient_trees], dtype=float)

    def _hessian(self, x: np.ndarray) -> np.ndarray:
        return np.array(
            [[evaluate(e, x) for e in row] for row in self.hessian_trees], dtype=float
        )

    def describe(self):
        return {**super().describe(), "expression": self.expression}
