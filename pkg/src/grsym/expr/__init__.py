"""Exact expression kernel: canonical rational expressions, parsing, linear algebra."""

from .core import (
    Atom, Expr, ExprError, NonlinearError, SingularPointError, UnsupportedError,
    ONE, ZERO, I, as_expr, const, coordinate, parameter, conjugate, declare_derivative,
    exp, sin, cos, sqrt, log, func, function_family,
)
from .parser import Context, ParseError, UndeclaredError, parse, parse_ast
from .linear import LinearSolutionSpace, coefficient_matrix, nullspace, solve_linear


def differentiate(e: Expr, v: Atom) -> Expr:
    return as_expr(e).diff(v)


def substitute(e: Expr, bindings) -> Expr:
    return as_expr(e).subs(bindings)


def is_zero(e: Expr) -> bool:
    return as_expr(e).is_zero()


__all__ = [
    "Atom", "Expr", "ExprError", "NonlinearError", "SingularPointError", "UnsupportedError",
    "ONE", "ZERO", "I", "as_expr", "const", "coordinate", "parameter", "conjugate",
    "declare_derivative", "exp", "sin", "cos", "sqrt", "log", "func", "function_family",
    "Context", "ParseError", "UndeclaredError", "parse", "parse_ast",
    "LinearSolutionSpace", "coefficient_matrix", "nullspace", "solve_linear",
    "differentiate", "substitute", "is_zero",
]
