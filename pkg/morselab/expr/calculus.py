"""
Exact symbolic differentiation and light simplification of expression trees.

`simplify` is value-preserving but not canonical: it folds constants and
removes additive/multiplicative identities, which keeps derivative trees small
enough that Hessians of catalog-sized expressions stay cheap to evaluate.
"""

from functools import singledispatch
from typing import List

import numpy as np

from .nodes import FUNCTIONS, Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sub, Var
from ..exceptions import InputError

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(expr: Expr, value: float) -> bool:
    return isinstance(expr, Const) and expr.value == value


@singledispatch
def simplify(expr: Expr) -> Expr:
    """
    Rewrite an expression without changing its value.

    Applies 0*e -> 0, e+0 -> e, 1*e -> e, double negation and
    constant folding, bottom-up.
    """
    raise TypeError(f"Cannot simplify a {type(expr).__name__}")


@simplify.register(Const)
@simplify.register(Var)
def _(expr: Expr) -> Expr:
    return expr


@simplify.register
def _(expr: Neg) -> Expr:
    inner = simplify(expr.operand)
    if isinstance(inner, Const):
        return Const(-inner.value)
    if isinstance(inner, Neg):
        return inner.operand
    return Neg(inner)


@simplify.register
def _(expr: Add) -> Expr:
    left, right = simplify(expr.left), simplify(expr.right)
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(left.value + right.value)
    if _is_const(left, 0.0):
        return right
    if _is_const(right, 0.0):
        return left
    if isinstance(right, Neg):
        return Sub(left, right.operand)
    return Add(left, right)


@simplify.register
def _(expr: Sub) -> Expr:
    left, right = simplify(expr.left), simplify(expr.right)
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(left.value - right.value)
    if _is_const(right, 0.0):
        return left
    if _is_const(left, 0.0):
        return simplify(Neg(right))
    return Sub(left, right)


@simplify.register
def _(expr: Mul) -> Expr:
    left, right = simplify(expr.left), simplify(expr.right)
    if isinstance(left, Const) and isinstance(right, Const):
        return Const(left.value * right.value)
    if _is_const(left, 0.0) or _is_const(right, 0.0):
        return ZERO
    if _is_const(left, 1.0):
        return right
    if _is_const(right, 1.0):
        return left
    if _is_const(left, -1.0):
        return simplify(Neg(right))
    if _is_const(right, -1.0):
        return simplify(Neg(left))
    return Mul(left, right)


@simplify.register
def _(expr: Div) -> Expr:
    left, right = simplify(expr.left), simplify(expr.right)
    if isinstance(left, Const) and isinstance(right, Const) and right.value != 0.0:
        return Const(left.value / right.value)
    if _is_const(right, 1.0):
        return left
    if _is_const(left, 0.0) and not _is_const(right, 0.0):
        return ZERO
    return Div(left, right)


@simplify.register
def _(expr: Pow) -> Expr:
    base = simplify(expr.base)
    if expr.exponent == 0:
        return ONE
    if expr.exponent == 1:
        return base
    if isinstance(base, Const) and (base.value != 0.0 or expr.exponent > 0):
        return Const(float(np.power(float(base.value), expr.exponent)))
    return Pow(base, expr.exponent)


@simplify.register
def _(expr: Call) -> Expr:
    arg = simplify(expr.arg)
    if isinstance(arg, Const):
        return Const(float(FUNCTIONS[expr.func](arg.value)))
    return Call(expr.func, arg)


@singledispatch
def _d(expr: Expr, var: int) -> Expr:
    raise TypeError(f"Cannot differentiate a {type(expr).__name__}")


@_d.register
def _(expr: Const, var: int) -> Expr:
    return ZERO


@_d.register
def _(expr: Var, var: int) -> Expr:
    return ONE if expr.index == var else ZERO


@_d.register
def _(expr: Neg, var: int) -> Expr:
    return Neg(_d(expr.operand, var))


@_d.register
def _(expr: Add, var: int) -> Expr:
    return Add(_d(expr.left, var), _d(expr.right, var))


@_d.register
def _(expr: Sub, var: int) -> Expr:
    return Sub(_d(expr.left, var), _d(expr.right, var))


@_d.register
def _(expr: Mul, var: int) -> Expr:
    return Add(Mul(_d(expr.left, var), expr.right), Mul(expr.left, _d(expr.right, var)))


@_d.register
def _(expr: Div, var: int) -> Expr:
    numerator = Sub(
        Mul(_d(expr.left, var), expr.right),
        Mul(expr.left, _d(expr.right, var)),
    )
    return Div(numerator, Pow(expr.right, 2))


@_d.register
def _(expr: Pow, var: int) -> Expr:
    if expr.exponent == 0:
        return ZERO
    outer = Mul(Const(float(expr.exponent)), Pow(expr.base, expr.exponent - 1))
    return Mul(outer, _d(expr.base, var))


@_d.register
def _(expr: Call, var: int) -> Expr:
    inner = _d(expr.arg, var)
    if expr.func == "sin":
        outer: Expr = Call("cos", expr.arg)
    elif expr.func == "cos":
        outer = Neg(Call("sin", expr.arg))
    elif expr.func == "exp":
        outer = Call("exp", expr.arg)
    else:
        raise TypeError(f"No derivative rule for '{expr.func}'")
    return Mul(outer, inner)


def differentiate(expr: Expr, var: int) -> Expr:
    """
    Exact partial derivative of `expr` with respect to variable `var`.

    The result is simplified, so derivatives in unused variables collapse
    to the constant 0.

    Raises:
        InputError: Negative variable index
    """
    if var < 0:
        raise InputError(f"Variable index must be non-negative, got {var}", parameter="var")
    return simplify(_d(expr, var))


def gradient_exprs(expr: Expr, dimension: int) -> List[Expr]:
    """Partial derivatives in every coordinate."""
    return [differentiate(expr, i) for i in range(dimension)]


def hessian_exprs(expr: Expr, dimension: int) -> List[List[Expr]]:
    """Second partials; only the upper triangle is differentiated, the rest mirrored."""
    first = gradient_exprs(expr, dimension)
    rows: List[List[Expr]] = [[ZERO] * dimension for _ in range(dimension)]
    for i in range(dimension):
        for j in range(i, dimension):
            entry = differentiate(first[i], j)
            rows[i][j] = entry
            rows[j][i] = entry
    return rows
