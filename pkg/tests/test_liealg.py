from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from grsym.expr import ZERO, as_expr
from grsym.manifold import dgsetup
from grsym.liealg import (LieAlgebra, LieAlgebraError, Subspace, bracket_span, complementary_basis,
                          is_solvable, isometry_algebra, isotropy_subalgebra, isotropy_type,
                          killing_form, levi_decomposition, lie_algebra_data, query_reductive_pair,
                          radical, series, span, whole)

from spacetimes import godel


def from_matrices(mats):
    """Structure constants of a matrix Lie algebra; coordinates solved by sympy."""
    n = len(mats)
    B = sympy.Matrix([list(m) for m in mats]).T
    c = {}
    for i, j in itertools.combinations(range(n), 2):
        br = mats[i] * mats[j] - mats[j] * mats[i]
        sol = B.solve_least_squares(sympy.Matrix(list(br))) if n < B.rows else B.solve(sympy.Matrix(list(br)))
        assert B * sol == sympy.Matrix(list(br)), "matrices do not close"
        for k in range(n):
            if sol[k] != 0:
                c[(k, i, j)] = Fraction(int(sympy.fraction(sol[k])[0]), int(sympy.fraction(sol[k])[1]))
    return LieAlgebra(n, c)


def _E(i, j, size):
    m = sympy.zeros(size, size)
    m[i, j] = 1
    return m


SL2 = [_E(0, 0, 2) - _E(1, 1, 2), _E(0, 1, 2), _E(1, 0, 2)]          # h, e, f
# sl(2) acting on R^2, as 3x3 affine matrices: h, e, f, v1, v2
AFF = [_E(0, 0, 3) - _E(1, 1, 3), _E(0, 1, 3), _E(1, 0, 3), _E(0, 2, 3), _E(1, 2, 3)]


def _so3():
    return LieAlgebra(3, {(2, 0, 1): 1, (0, 1, 2): 1, (1, 2, 0): 1})


def _vec(*vals):
    return [as_expr(Fraction(v)) for v in vals]


def test_sl2_killing_form_matches_trace_of_ad_products():
    L = from_matrices(SL2)
    K = killing_form(L)
    assert K == [_vec(8, 0, 0), _vec(0, 0, 4), _vec(0, 4, 0)]
    ads = [sympy.Matrix([[sympy.Rational(str(e)) for e in row] for row in L.ad(L.basis(i))]) for i in range(3)]
    for i in range(3):
        for j in range(3):
            assert (ads[i] * ads[j]).trace() == sympy.Rational(str(K[i][j]))


def test_so3_is_semisimple():
    L = _so3()
    assert killing_form(L) == [_vec(-2, 0, 0), _vec(0, -2, 0), _vec(0, 0, -2)]
    R, S = levi_decomposition(L)
    assert R.dimension == 0 and S.dimension == 3
    assert not is_solvable(L)


def test_heisenberg_series():
    L = LieAlgebra(3, {(2, 0, 1): 1})
    assert [s.dimension for s in series(L, "derived")] == [3, 1, 0]
    assert [s.dimension for s in series(L, "lower-central")] == [3, 1, 0]
    assert is_solvable(L)
    assert radical(L).dimension == 3


def test_jacobi_violation_is_rejected():
    with pytest.raises(LieAlgebraError, match="Jacobi"):
        LieAlgebra(3, {(1, 0, 1): 1, (2, 1, 2): 1, (0, 2, 0): 1})
    with pytest.raises(LieAlgebraError, match="antisymmetric"):
        LieAlgebra(2, {(1, 0, 1): 1, (1, 1, 0): 1})


def test_levi_decomposition_of_affine_sl2():
    L = from_matrices(AFF)
    R, S = levi_decomposition(L)
    assert (R.dimension, S.dimension) == (2, 3)
    assert str(R) == "[e4, e5]"


def _check_levi(L, R, S):
    n = L.n
    assert R.dimension + S.dimension == n
    assert span(L, R.rows + S.rows).dimension == n
    # R is a solvable ideal, S a perfect subalgebra
    assert all(R.contains(L.bracket(x, r)) for x in whole(L).rows for r in R.rows)
    assert is_solvable(L, R)
    assert all(S.contains(L.bracket(a, b)) for a in S.rows for b in S.rows)
    assert bracket_span(L, S, S).dimension == S.dimension


@settings(max_examples=30, deadline=None, derandomize=True)
@given(st.lists(st.integers(-2, 2), min_size=25, max_size=25))
def test_levi_decomposition_is_basis_independent(entries):
    P = sympy.Matrix(5, 5, entries)
    assume(P.det() != 0)
    mats = [sum((P[i, k] * AFF[k] for k in range(5)), sympy.zeros(3, 3)) for i in range(5)]
    L = from_matrices(mats)
    R, S = levi_decomposition(L)
    assert (R.dimension, S.dimension) == (2, 3)
    _check_levi(L, R, S)


_AFF_ALGEBRA = from_matrices(AFF)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(st.lists(st.integers(-3, 3), min_size=15, max_size=15))
def test_bracket_is_antisymmetric_and_satisfies_jacobi(coords):
    L = _AFF_ALGEBRA
    x, y, z = _vec(*coords[:5]), _vec(*coords[5:10]), _vec(*coords[10:])
    assert L.bracket(x, y) == [-e for e in L.bracket(y, x)]
    jac = [a + b + c for a, b, c in zip(L.bracket(x, L.bracket(y, z)), L.bracket(y, L.bracket(z, x)),
                                        L.bracket(z, L.bracket(x, y)))]
    assert all(e.is_zero() for e in jac)


def test_godel_isometry_algebra():
    G = godel()
    L = lie_algebra_data(G.killing)
    assert str(L) == "[[e1, e3] = -e1, [e1, e4] = 2*e3, [e3, e4] = -e4]"
    K = killing_form(L)
    assert sympy.Matrix([[sympy.Rational(str(e)) for e in row] for row in K]).rank() == 3
    # the series stops at its first repeated term
    assert [str(s) for s in series(L)] == ["[e1, e2, e3, e4, e5]", "[e1, e3, e4]", "[e1, e3, e4]"]
    R, S = levi_decomposition(L)
    assert (str(R), str(S)) == ("[e2, e5]", "[e1, e3, e4]")


def test_godel_isotropy_and_reductive_complement():
    G = godel()
    L = lie_algebra_data(G.killing)
    vecs, rows = isotropy_subalgebra(G.killing, G.origin)
    assert len(vecs) == 1
    assert L.format_vector(rows[0]) == "e1 - 2*e2 - 1/2*e4"
    it = isotropy_type(G.killing, G.origin, G.metric)
    assert it.label == "Rotation (F12)"
    assert it.invariants == [(as_expr(2), ZERO)]
    h = Subspace(L, rows)
    assert str(complementary_basis(h)) == "[e1, e2, e3, e5]"
    M = complementary_basis(h, parametric=True)
    res = query_reductive_pair(h, M)
    assert res.verdict and res.free_parameter_count == 2
    t1, t2, t3, t4 = M.parameters
    assert res.solution == {t1: t2.expr - Fraction(1, 2), t3: ZERO}
    assert res.free_parameters == [t2, t4]
    # [h, m] in m for the resulting family
    m = res.complement
    assert all(m.contains(L.bracket(rows[0], r)) for r in m.rows)


def test_isometry_algebra_from_curvature_has_the_same_invariants():
    G = godel()
    L = isometry_algebra(G.metric, G.origin)
    assert L.n == 5
    R, S = levi_decomposition(L)
    assert (R.dimension, S.dimension) == (2, 3)
    assert [s.dimension for s in series(L)] == [5, 3, 3]


def test_non_reductive_pair():
    # [e1, e2] = e2 with h = span(e2): [e2, e1 + t e2] = -e2 is never in m
    L = LieAlgebra(2, {(1, 0, 1): 1})
    h = Subspace(L, [_vec(0, 1)])
    res = query_reductive_pair(h, complementary_basis(h, parametric=True))
    assert not res.verdict
    # h = span(e1) admits exactly one reductive complement e2 + t e1, the one with t = 0
    h1 = Subspace(L, [_vec(1, 0)])
    m1 = complementary_basis(h1, parametric=True)
    res1 = query_reductive_pair(h1, m1)
    assert res1.verdict and res1.solution == {m1.parameters[0]: ZERO}


def test_euclidean_isotropy_is_so3():
    F = dgsetup(["x", "y", "z"])
    x, y, z = (c.expr for c in F.coords)
    D = F.vector
    fields = [D(0), D(1), D(2), D(0).scale(-y) + D(1).scale(x), D(1).scale(-z) + D(2).scale(y),
              D(2).scale(-x) + D(0).scale(z)]
    L = lie_algebra_data(fields)
    vecs, rows = isotropy_subalgebra(fields, {"x": 0, "y": 0, "z": 0})
    assert len(vecs) == 3
    h = Subspace(L, rows)
    assert bracket_span(L, h, h).dimension == 3
    R, S = levi_decomposition(L)
    assert (R.dimension, S.dimension) == (3, 3)


def test_non_closed_fields_are_rejected():
    F = dgsetup(["x"])
    x = F.coords[0].expr
    with pytest.raises(LieAlgebraError, match="not in their span"):
        lie_algebra_data([F.vector(0), F.vector(0).scale(x ** 2)])
