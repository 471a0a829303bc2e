"""
Expression tree nodes.

Nodes are frozen dataclasses, so trees are immutable, hashable and safe to
share between threads. `str()` renders a tree back into the grammar accepted
by `morselab.expr.parser.parse`, inserting only the parentheses precedence
requires.
"""

from dataclasses import dataclass
from functools import singledispatch
from typing import Callable, Dict, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# name -> numpy implementation; extend together with calculus._d_call
FUNCTIONS: Dict[str, Callable[[ArrayLike], ArrayLike]] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
}

_PREC_SUM = 1
_PREC_PRODUCT = 2
_PREC_UNARY = 3
_PREC_POWER = 4
_PREC_ATOM = 5


class Expr:
    """Base class of all expression nodes."""

    precedence: int = _PREC_ATOM

    def _wrap(self, child: "Expr", strict: bool = False) -> str:
        child_prec = child.binding()
        if child_prec < self.precedence or (strict and child_prec == self.precedence):
            return f"({child})"
        return str(child)

    def binding(self) -> int:
        """Precedence this node presents to its parent."""
        return self.precedence


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def binding(self) -> int:
        return _PREC_UNARY if self.value < 0 else _PREC_ATOM

    def __str__(self) -> str:
        if float(self.value).is_integer():
            return str(int(self.value))
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int
    name: str = ""

    def __str__(self) -> str:
        return self.name or f"x{self.index + 1}"


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr
    precedence = _PREC_UNARY

    def __str__(self) -> str:
        # -a*b parses as (-a)*b, so products keep their parentheses
        if self.operand.binding() <= _PREC_PRODUCT:
            return f"-({self.operand})"
        return f"-{self.operand}"


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr
    symbol = "?"
    strict_right = False

    def __str__(self) -> str:
        left = self._wrap(self.left)
        right = self._wrap(self.right, strict=self.strict_right)
        return f"{left} {self.symbol} {right}"


@dataclass(frozen=True)
class Add(_Binary):
    precedence = _PREC_SUM
    symbol = "+"


@dataclass(frozen=True)
class Sub(_Binary):
    precedence = _PREC_SUM
    symbol = "-"
    strict_right = True


@dataclass(frozen=True)
class Mul(_Binary):
    precedence = _PREC_PRODUCT
    symbol = "*"


@dataclass(frozen=True)
class Div(_Binary):
    precedence = _PREC_PRODUCT
    symbol = "/"
    strict_right = True


@dataclass(frozen=True)
class Pow(Expr):
    """Integer power. Negative exponents require a nonzero base from the caller."""

    base: Expr
    exponent: int
    precedence = _PREC_POWER

    def __str__(self) -> str:
        base = self._wrap(self.base, strict=True)
        return f"{base}^{self.exponent}"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


@singledispatch
def evaluate(expr: Expr, x: np.ndarray) -> ArrayLike:
    """
    Evaluate an expression at a point.

    `x` may be a single point of shape (n,) or a batch of shape (n, m);
    the result then has shape (m,).
    """
    raise TypeError(f"Cannot evaluate a {type(expr).__name__}")


@evaluate.register
def _(expr: Const, x: np.ndarray) -> ArrayLike:
    return expr.value


@evaluate.register
def _(expr: Var, x: np.ndarray) -> ArrayLike:
    return x[expr.index]


@evaluate.register
def _(expr: Neg, x: np.ndarray) -> ArrayLike:
    return np.negative(evaluate(expr.operand, x))


@evaluate.register
def _(expr: Add, x: np.ndarray) -> ArrayLike:
    return np.add(evaluate(expr.left, x), evaluate(expr.right, x))


@evaluate.register
def _(expr: Sub, x: np.ndarray) -> ArrayLike:
    return np.subtract(evaluate(expr.left, x), evaluate(expr.right, x))


@evaluate.register
def _(expr: Mul, x: np.ndarray) -> ArrayLike:
    return np.multiply(evaluate(expr.left, x), evaluate(expr.right, x))


@evaluate.register
def _(expr: Div, x: np.ndarray) -> ArrayLike:
    return np.divide(evaluate(expr.left, x), evaluate(expr.right, x))


@evaluate.register
def _(expr: Pow, x: np.ndarray) -> ArrayLike:
    base = np.asarray(evaluate(expr.base, x), dtype=float)
    return np.power(base, expr.exponent)


@evaluate.register
def _(expr: Call, x: np.ndarray) -> ArrayLike:
    return FUNCTIONS[expr.func](evaluate(expr.arg, x))
