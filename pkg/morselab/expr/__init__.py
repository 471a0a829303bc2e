"""
Expression layer: parse user formulas and differentiate them exactly.
"""

from .calculus import differentiate, gradient_exprs, hessian_exprs, simplify
from .nodes import FUNCTIONS, Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sub, Var, evaluate
from .parser import parse, tokenize, validate_variables

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "FUNCTIONS",
    "evaluate",
    "parse",
    "tokenize",
    "validate_variables",
    "differentiate",
    "simplify",
    "gradient_exprs",
    "hessian_exprs",
]
