from __future__ import annotations

from fractions import Fraction

import pytest

from grsym.expr import ONE, exp, func
from grsym.manifold import DOWN, T, GeometryError, Metric, Tensor, commutator, dgsetup, tensor_product
from grsym.curvature import lie_derivative
from grsym.invariants import (AnsatzBasis, AnsatzError, UnsupportedFlowError, check_invariant_equation,
                              default_ansatz, flow, get_components, homothety_vectors,
                              infinitesimal_normalizer, invariant_fields, isometry_dimension_at_point,
                              killing_tensors, killing_vectors, killing_yano, killing_yano_square,
                              monomials, pointwise_generators, pullback, symmetric_products)

from spacetimes import godel, plane_wave


def euclidean(n):
    names = ["x", "y", "z", "w"][:n]
    F = dgsetup(names)
    g = Metric(Tensor(F, ((T, DOWN), (T, DOWN)), {(i, i): ONE for i in range(n)}))
    return F, g


def test_monomial_count():
    F, _ = euclidean(3)
    assert len(monomials(F.coords, 2)) == 10


def test_euclidean_plane_isometries_and_homothety():
    F, g = euclidean(2)
    A = AnsatzBasis.polynomial(F.coords, 2)
    assert killing_vectors(g, A).dimension == 3
    H, K = homothety_vectors(g, A)
    x, y = (c.expr for c in F.coords)
    assert K.dimension == 3
    # unique up to Killing fields; normalized so that L_H g = 2 g
    assert lie_derivative(H, g.value) == g.value.scale(2)
    want = F.vector(0).scale(x) + F.vector(1).scale(y)
    assert get_components(H - want, K.fields, "membership", "constants")


def test_euclidean_space_has_six_killing_vectors():
    F, g = euclidean(3)
    K = killing_vectors(g, AnsatzBasis.polynomial(F.coords, 1))
    assert K.dimension == 6
    for X in K:
        assert check_invariant_equation("killing-vector", g, X).is_zero()


def test_flat_killing_tensors_are_products_of_killing_vectors():
    F, g = euclidean(2)
    A = AnsatzBasis.polynomial(F.coords, 2)
    K1 = killing_tensors(g, 1, A)
    K2 = killing_tensors(g, 2, A)
    assert (K1.dimension, K2.dimension) == (3, 6)
    prods = symmetric_products(K1.fields, 2)
    assert get_components(K2.fields, prods, "membership", "constants")
    assert get_components(prods, K2.fields, "membership", "constants")


def test_flat_killing_yano_forms():
    F, g = euclidean(3)
    Y = killing_yano(g, 2, AnsatzBasis.polynomial(F.coords, 1))
    # constant 2-forms (3) and x^a dx^b ^ dx^c totally skew (1)
    assert Y.dimension == 4
    for y in Y:
        assert check_invariant_equation("killing-yano", g, y).is_zero()
        K = killing_yano_square(y, g)
        assert check_invariant_equation("killing", g, K).is_zero()


def test_godel_killing_vectors():
    G = godel()
    K = killing_vectors(G.metric, default_ansatz(G.metric))
    assert K.dimension == 5
    assert get_components(G.killing, K.fields, "membership", "constants")
    assert get_components(K.fields, G.killing, "membership", "constants")


def test_godel_has_no_proper_homothety():
    G = godel()
    H, K = homothety_vectors(G.metric, default_ansatz(G.metric))
    assert H is None
    assert K.dimension == 5


def test_godel_killing_tensors_of_rank_two():
    G = godel()
    x, z = G.coords[1], G.coords[3]
    A = AnsatzBasis([exp(x) ** j * z ** k for j in range(-2, 3) for k in range(3)], G.frame.coords)
    K1 = killing_tensors(G.metric, 1, A)
    assert K1.dimension == 5
    A2 = AnsatzBasis([exp(x) ** j * z ** k for j in range(-2, 5) for k in range(5)], G.frame.coords)
    K2 = killing_tensors(G.metric, 2, A2)
    assert K2.dimension == 15
    prods = symmetric_products(K1.fields, 2)
    assert get_components(K2.fields, prods, "membership", "constants")
    assert get_components(prods, K2.fields, "membership", "constants")
    assert get_components(G.value, K2.fields, "membership", "constants")


def test_godel_isometry_dimension_from_curvature():
    G = godel()
    data = isometry_dimension_at_point(G.metric, G.origin)
    assert data.dimension == 5 and data.stable


def test_ansatz_validation():
    F, _ = euclidean(2)
    x = F.coords[0].expr
    with pytest.raises(AnsatzError, match="dependent"):
        AnsatzBasis([x, 2 * x], F.coords)
    open_basis = AnsatzBasis([x ** 2], F.coords)
    assert [str(m) for m in open_basis.missing_derivatives()] == ["2*x"]
    with pytest.raises(AnsatzError, match="not closed"):
        open_basis.require_closed()


def test_invariant_functions_and_forms_of_translations():
    F, g = euclidean(2)
    A = AnsatzBasis.polynomial(F.coords, 2)
    sc = invariant_fields([F.vector(0)], (), A)
    assert [str(f) for f in sc] == ["1", "y", "y^2"]
    forms = invariant_fields([F.vector(0), F.vector(1)], ((T, DOWN),), A)
    assert forms.dimension == 2


def test_flat_plane_normalizer_of_translations():
    F, g = euclidean(2)
    N = infinitesimal_normalizer([F.vector(0), F.vector(1)], AnsatzBasis.polynomial(F.coords, 1))
    # gl(2) acting linearly: four fields modulo the translations
    assert N.dimension == 4
    for Z in N:
        for X in (F.vector(0), F.vector(1)):
            assert get_components(commutator(Z, X), [F.vector(0), F.vector(1)], "membership", "constants")


def test_pointwise_generators_prefer_the_first_fields():
    F, _ = euclidean(2)
    x = F.coords[0].expr
    fields = [F.vector(0), F.vector(0).scale(x), F.vector(1)]
    assert pointwise_generators(fields) == [F.vector(0), F.vector(1)]


def test_flow_of_a_rotation_is_unsupported_but_dilation_works():
    F, g = euclidean(2)
    x, y = (c.expr for c in F.coords)
    with pytest.raises(UnsupportedFlowError):
        flow(F.vector(0).scale(-y) + F.vector(1).scale(x))
    phi = flow(F.vector(0).scale(x) + F.vector(1).scale(y), "s")
    s = phi.parameter.expr
    assert phi.images == [exp(s) * x, exp(s) * y]
    assert pullback(phi, g.value) == g.value.scale(exp(2 * s))
    assert pullback(phi.at(0), g.value) == g.value


def test_flow_composition_is_a_group_law():
    F, _ = euclidean(2)
    x, y = (c.expr for c in F.coords)
    X = F.vector(0).scale(y) + F.vector(1)
    phi = flow(X, "s")
    a, b = Fraction(1, 3), Fraction(2, 5)
    assert phi.at(a).compose(phi.at(b)).images == phi.at(a + b).images


def test_pullback_requires_covariant_input():
    F, _ = euclidean(2)
    with pytest.raises(GeometryError):
        pullback({"x": F.coords[1].expr}, F.vector(0))


def test_plane_wave_homothety_and_flow():
    W = plane_wave()
    A = AnsatzBasis([ONE, W.coords[1], W.coords[2], W.coords[3], W.P, W.Q, W.A], W.frame.coords)
    H, K = homothety_vectors(W.metric, A, closure=False)
    assert K.dimension == 5
    assert get_components(W.killing, K.fields, "membership", "constants")
    assert get_components(H - W.homothety, K.fields, "membership", "constants")
    phi = flow(W.homothety, "s")
    s = phi.parameter.expr
    assert pullback(phi, W.value) == W.value.scale(exp(2 * s))


def test_plane_wave_invariant_symmetric_tensors():
    W = plane_wave()
    u = W.coords[0]
    sc = invariant_fields(W.gamma, (), AnsatzBasis([ONE, u, u ** 2, W.coords[1], W.coords[2], W.coords[3]],
                                                   W.frame.coords))
    assert [str(f) for f in sc] == ["1", "u", "u^2"]
    S = invariant_fields(W.gamma, ((T, DOWN), (T, DOWN)),
                         AnsatzBasis([ONE, W.Pp, W.Qp, W.Pp * W.Qp], W.frame.coords),
                         symmetry="symmetric", closure=False)
    assert S.dimension == 5
    assert len(pointwise_generators(S.fields)) == 2
    assert all(c is not None for c in get_components(S.fields, [W.Q1, W.Q2]))


def test_plane_wave_normalizer():
    W = plane_wave()
    u, v, x, y = W.coords
    N = infinitesimal_normalizer(W.gamma, AnsatzBasis([ONE, u, u ** 2, v, x, y, W.P, W.Q], W.frame.coords),
                                 closure=False)
    D = W.frame.vector
    want = [D(1).scale(u), D(1).scale(u ** 2), D(1).scale(W.P), D(1).scale(W.Q),
            D(1).scale(2 * v) + D(2).scale(x) + D(3).scale(y)]
    assert N.dimension == 5
    assert get_components(want, list(N) + W.gamma, "membership", "constants")


def test_plane_wave_transformation_pullbacks():
    W = plane_wave()
    u, v, x, y = W.coords
    D = W.frame.vector
    f = func("f", u)
    trans = flow(D(1).scale(f), "alpha")
    scale = flow(D(1).scale(2 * v) + D(2).scale(x) + D(3).scale(y), "beta")
    alpha, beta = trans.parameter.expr, scale.parameter.expr
    fp = func("f", u, 1)
    du = W.frame.form(0)
    assert pullback(trans, W.Q1) == W.Q1 and pullback(scale, W.Q1) == W.Q1
    assert pullback(trans, W.Q2) == W.Q2 + tensor_product(du, du).scale(-2 * alpha * W.Pp * W.Qp * fp)
    assert pullback(scale, W.Q2) == W.Q2.scale(exp(2 * beta))
