from __future__ import annotations

import sympy
import pytest

from grsym.expr import ONE, as_expr, cos, exp, parameter, sin, sqrt
from grsym.manifold import (DOWN, T, GeometryError, Metric, Tensor, brackets, dgsetup, frame_data,
                            raise_lower, tensor_product, to_chart, wedge)
from grsym.curvature import (christoffel, covariant_derivative, divergence, einstein, einstein_residual,
                             energy_momentum, exterior_derivative, lie_derivative,
                             matter_field_equations, ricci, ricci_scalar, riemann, weyl)

import oracle
from spacetimes import godel, reissner_nordstrom


def _diag_metric(frame, entries):
    return Metric(Tensor(frame, ((T, DOWN), (T, DOWN)), {(i, i): as_expr(e) for i, e in enumerate(entries)}))


def schwarzschild():
    F = dgsetup(["t", "r", "theta", "phi"])
    t, r, th, ph = (c.expr for c in F.coords)
    M = parameter("M").expr
    f = 1 - 2 * M / r
    return F, _diag_metric(F, [-f, 1 / f, r ** 2, r ** 2 * sin(th) ** 2])


def test_schwarzschild_christoffel_against_oracle():
    F, g = schwarzschild()
    G = christoffel(g)
    r, M = F.coords[1].expr, parameter("M").expr
    assert G[1, 0, 0] == M * (r - 2 * M) / r ** 3
    # every coefficient agrees with a direct sympy computation
    names = ["t", "r", "theta", "phi", "M"]
    xs = sympy.symbols("t r theta phi")
    Ms = sympy.Symbol("M")
    gs = sympy.diag(-(1 - 2 * Ms / xs[1]), 1 / (1 - 2 * Ms / xs[1]), xs[1] ** 2, xs[1] ** 2 * sympy.sin(xs[2]) ** 2)
    ref = oracle.christoffel(gs, xs)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                assert sympy.simplify(oracle.to_sympy(G[a, b, c], names) - ref[a][b][c]) == 0


def test_schwarzschild_is_ricci_flat_with_nonzero_weyl():
    F, g = schwarzschild()
    R = riemann(g)
    assert ricci(g, R).is_zero()
    assert not weyl(g, R).is_zero()
    r, M = F.coords[1].expr, parameter("M").expr
    # R^t_rtr
    assert R[0, 1, 0, 1] == 2 * M / (r ** 2 * (r - 2 * M))


def test_round_sphere_has_positive_scalar_curvature():
    F = dgsetup(["theta", "phi"])
    th = F.coords[0].expr
    g = _diag_metric(F, [1, sin(th) ** 2])
    assert ricci_scalar(g) == as_expr(2)


def test_godel_einstein_tensor_against_oracle():
    G = godel()
    Gup = einstein(G.metric)
    names = ["t", "x", "y", "z"]
    xs = sympy.symbols("t x y z")
    gs = sympy.Matrix(4, 4, lambda i, j: oracle.to_sympy(G.metric.matrix[i][j], names))
    ref, Rs = oracle.einstein_up(gs, xs)
    assert sympy.simplify(oracle.to_sympy(ricci_scalar(G.metric), names) - Rs) == 0
    for i in range(4):
        for j in range(4):
            assert sympy.simplify(oracle.to_sympy(Gup[i, j], names) - ref[i, j]) == 0


def test_godel_is_a_dust_solution_with_cosmological_constant():
    # Ric = u u, hence R = -1 and G^{ab} - 1/2 g^{ab} = u^a u^b
    G = godel()
    u = G.orthonormal[0]
    T_ = energy_momentum("dust", G.metric, ONE, u)
    assert ricci_scalar(G.metric) == -ONE
    assert einstein_residual(G.metric, as_expr(-1) / 2, T_).is_zero()


def test_contracted_bianchi_identity_on_godel():
    G = godel()
    assert divergence(einstein(G.metric), G.metric).is_zero()


def test_riemann_symmetries():
    G = godel()
    R = riemann(G.metric)
    Rd = raise_lower(R, G.metric, [0])
    for (a, b, c, d), v in Rd.comps.items():
        assert Rd[b, a, c, d] == -v
        assert Rd[c, d, a, b] == v
        assert (v + Rd[a, c, d, b] + Rd[a, d, b, c]).is_zero()


def test_anholonomic_curvature_matches_chart():
    G = godel()
    E = frame_data(G.orthonormal)
    eta = _diag_metric(E, [-1, 1, 1, 1])
    assert to_chart(riemann(eta)) == riemann(G.metric)
    assert to_chart(ricci(eta)) == ricci(G.metric)


def test_reissner_nordstrom_solves_einstein_maxwell():
    RN = reissner_nordstrom()
    g = RN.metric
    T_ = energy_momentum("electromagnetic", g, RN.maxwell)
    assert einstein_residual(g, None, T_).is_zero()
    div, dF = matter_field_equations("electromagnetic", g, RN.maxwell)
    assert div.is_zero() and dF.is_zero()


def test_reissner_nordstrom_orthonormal_frame():
    RN = reissner_nordstrom()
    r, th, M, Q = RN.coords[1], RN.coords[2], RN.M, RN.Q
    E = frame_data(RN.orthonormal)
    got = {(i, j) for i, j, _ in brackets(E)}
    Delta = r ** 2 - 2 * M * r + Q ** 2
    sD = sqrt(Delta)
    assert got == {(0, 1), (1, 2), (1, 3), (2, 3)}
    assert E.C(0, 0, 1) == (M * r - Q ** 2) * sD / (r ** 2 * Delta)
    assert E.C(2, 1, 2) == -sD / r ** 2
    assert E.C(3, 1, 3) == -sD / r ** 2
    assert E.C(3, 2, 3) == cos(th) * sin(th) / (r * cos(th) ** 2 - r)
    eta = _diag_metric(E, [-1, 1, 1, 1])
    Ric = ricci(eta)
    q = Q ** 2 / r ** 4
    assert [Ric[i, i] for i in range(4)] == [q, -q, q, q]
    assert all(Ric[i, j].is_zero() for i in range(4) for j in range(4) if i != j)


def test_exterior_derivative_squares_to_zero():
    F = dgsetup(["x", "y", "z"])
    x, y, z = (c.expr for c in F.coords)
    w = F.form(0).scale(x * y * exp(z)) + F.form(2).scale(sin(x * y))
    assert exterior_derivative(exterior_derivative(w)).is_zero()
    # d(z dx^dy) = dz^dx^dy: the (x, y, z) component is +1
    dv = exterior_derivative(wedge(F.form(0), F.form(1)).scale(z))
    assert dv[0, 1, 2] == ONE and dv[1, 0, 2] == -ONE


def test_exterior_derivative_rejects_non_forms():
    F = dgsetup(["x", "y"])
    with pytest.raises(GeometryError):
        exterior_derivative(tensor_product(F.form(0), F.form(1)))


def test_killing_fields_annihilate_the_metric():
    G = godel()
    for X in G.killing:
        assert lie_derivative(X, G.value).is_zero()


def test_metric_is_parallel():
    G = godel()
    assert covariant_derivative(G.value, christoffel(G.metric)).is_zero()
    assert covariant_derivative(G.metric.inverse, christoffel(G.metric)).is_zero()
