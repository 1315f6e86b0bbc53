from __future__ import annotations

import threading

import pytest

from grsym.expr import (I, ONE, ZERO, ExprError, NonlinearError, ParseError, UndeclaredError,
                        conjugate, coordinate, cos, differentiate, exp, func, is_zero, parameter,
                        parse, sin, solve_linear, sqrt, substitute)
from grsym.expr.core import SingularPointError, UnsupportedError
from grsym.expr.parser import Context, eval_numeric, parse_ast

r, x, y, u = (coordinate(n) for n in ("r", "x", "y", "u"))
M, Q, a = parameter("M"), parameter("Q"), parameter("a")
CTX = Context({"r": r, "x": x, "y": y, "u": u, "M": M, "Q": Q, "a": a, "theta": coordinate("theta")},
              functions={"f"})


def test_parse_metric_function():
    e = parse("1 - 2*M/r + Q^2/r^2", CTX)
    assert e == (r.expr ** 2 - 2 * M.expr * r.expr + Q.expr ** 2) / r.expr ** 2
    assert str(e) == "(r^2 - 2*r*M + Q^2)/r^2"


def test_parse_zero_and_pythagoras():
    assert parse("0", CTX) == ZERO
    assert parse("sin(theta)^2 + cos(theta)^2", CTX) == ONE


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse("1 +\n  * x", CTX)
    assert info.value.line == 2
    with pytest.raises(UndeclaredError):
        parse("z + 1", CTX)
    with pytest.raises(UndeclaredError):
        parse("g(x)", CTX)


def test_print_parse_round_trip_with_opaque_derivatives():
    e = func("f", u.expr, 2) * u.expr + sqrt(x.expr + 1) * exp(3 * y.expr)
    assert parse(str(e), CTX) == e


def test_differentiate_examples():
    f = parse("1 - 2*M/r + Q^2/r^2", CTX)
    assert differentiate(f, r) == (2 * M.expr * r.expr - 2 * Q.expr ** 2) / r.expr ** 3
    fu = func("f", u.expr)
    assert differentiate(fu * u.expr, u) == func("f", u.expr, 1) * u.expr + fu
    assert differentiate(exp(2 * x.expr), x) == 2 * exp(2 * x.expr)


def test_differentiate_transcendentals():
    th = x.expr
    assert differentiate(sin(th), x) == cos(th)
    assert differentiate(cos(th), x) == -sin(th)
    assert differentiate(sqrt(th), x) == 1 / (2 * sqrt(th))


def test_substitute_point_evaluation():
    t0, x0 = parameter("t0").expr, parameter("x0").expr
    psi0 = (t0 ** 4 - x0 ** 4) / (2 * t0 ** 2 * x0 ** 2)
    assert substitute(psi0, {parameter("t0"): a.expr, parameter("x0"): a.expr}).is_zero()
    assert substitute(psi0, {}) == psi0


def test_substitute_singular_point():
    with pytest.raises(SingularPointError) as info:
        substitute(1 / x.expr, {x: ZERO})
    assert "x" in str(info.value)


def test_is_zero_examples():
    assert is_zero(exp(x.expr) * exp(-x.expr) - 1)
    assert is_zero(sin(x.expr) ** 2 + cos(x.expr) ** 2 - 1)
    assert not is_zero(x.expr - y.expr)


def test_conjugation():
    ze, zb = coordinate("zeta", real=False), coordinate("zetab", real=False)
    pairing = {ze: zb, zb: ze}
    e = I * x.expr + ze.expr
    assert conjugate(e, pairing) == -I * x.expr + zb.expr
    p = x.expr ** 2 + 3 * y.expr
    assert conjugate(p, pairing) == p
    w = exp(ze.expr) * sin(x.expr) / (ze.expr + 2 * I)
    assert conjugate(conjugate(w, pairing), pairing) == w


def test_conjugation_rejects_unpaired_complex_coordinate():
    w = coordinate("w_unpaired", real=False)
    with pytest.raises(ExprError):
        conjugate(w.expr + 1, {})


def test_solve_linear_examples():
    u1, u2 = parameter("u1"), parameter("u2")
    assert solve_linear([x.expr * u1.expr + u2.expr, u2.expr], [u1, u2]).dimension == 0
    space = solve_linear([u1.expr - u2.expr], [u1, u2])
    assert space.basis == [[ONE, ONE]]


def test_solve_linear_parameter_branches():
    u1 = parameter("u1")
    space = solve_linear([a.expr * u1.expr], [u1], parameters=[a])
    assert space.dimension == 0
    [(cond, branch)] = space.branches
    assert cond == a.expr
    assert branch.basis == [[ONE]]


def test_solve_linear_never_branches_on_coordinates():
    u1 = parameter("u1")
    space = solve_linear([x.expr * u1.expr], [u1], parameters=[a])
    assert space.dimension == 0 and not space.branches


def test_solve_linear_rejects_nonlinear():
    u1 = parameter("u1")
    with pytest.raises(NonlinearError):
        solve_linear([u1.expr ** 2], [u1])


def test_transcendental_argument_must_be_polynomial():
    with pytest.raises(UnsupportedError):
        exp(1 / x.expr)


def test_canonical_form_matches_unsimplified_tree():
    src = "(x^2 - 1)/(x - 1) + exp(x)*exp(2*x) - sin(x)^2"
    e = parse(src, CTX)
    vals = {"x": 0.37}
    assert abs(e.evalf({x: 0.37}) - eval_numeric(parse_ast(src), vals)) < 1e-12


def test_atom_interning_is_consistent_across_threads():
    seen = []

    def make():
        seen.append(coordinate("thread_shared_atom"))

    threads = [threading.Thread(target=make) for _ in range(16)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len({id(s) for s in seen}) == 1
