"""Levi-Civita connection, covariant/Lie/exterior derivatives, curvature and
energy-momentum tensors.

Conventions (all frames, holonomic or not):

* ``Gamma^a_bc`` is the ``E_a`` component of ``nabla_{E_b} E_c``.
* Covariant derivatives append the derivative slot last:
  ``(nabla V)^a_c = E_c(V^a) + Gamma^a_cb V^b``.
* ``R^a_bcd`` is the ``E_a`` component of ``R(E_c, E_d) E_b`` with
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``; ``Ric_bd = R^a_bad``.
  A round sphere has positive scalar curvature.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .expr import core
from .expr.core import Expr, ZERO, as_expr
from .manifold import (C, DOWN, S, T, UP, Frame, GeometryError, Metric, Tensor, contract,
                       raise_lower, symmetrize, tensor_product)


class Connection:
    """Linear connection coefficients on a frame, plus an optional spin part."""

    def __init__(self, frame: Frame, gamma: dict[tuple[int, int, int], Expr], metric: Metric | None = None):
        self.frame = frame
        self.gamma = {k: v for k, v in gamma.items() if not v.is_zero()}
        self.metric = metric
        # by (c, e): [(a, Gamma^a_ce)] for fast index corrections
        self._by_ce: dict[tuple[int, int], list[tuple[int, Expr]]] = {}
        for (a, c, e), v in self.gamma.items():
            self._by_ce.setdefault((c, e), []).append((a, v))

    def __getitem__(self, key) -> Expr:
        return self.gamma.get(tuple(key), ZERO)

    def terms(self, c: int, e: int):
        return self._by_ce.get((c, e), ())

    def as_tensor(self) -> Tensor:
        """Coefficients packed as a (1,2) array (not a tensor under frame change)."""
        return Tensor(self.frame, ((T, UP), (T, DOWN), (T, DOWN)), self.gamma)


_CACHE: dict[int, tuple[Metric, Connection]] = {}


def christoffel(g: Metric) -> Connection:
    """Levi-Civita connection of ``g`` (Koszul formula with structure functions)."""
    hit = _CACHE.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    f = g.frame
    n = f.dim
    G = g.matrix
    dG = {(i, j, k): f.apply(k, G[i][j]) for i in range(n) for j in range(i, n) for k in range(n)
          if not G[i][j].is_zero()}

    def dg(i, j, k):  # E_k g_ij
        return dG.get((min(i, j), max(i, j), k), ZERO)

    def Cg(e_first, b, c, d):  # sum_e C^e_bc g_ed
        s = ZERO
        for e in range(n):
            cc = f.C(e, b, c)
            if not cc.is_zero() and not G[e][d].is_zero():
                s = s + cc * G[e][d]
        return s

    half = Fraction(1, 2)
    low = {}
    for d, b, c in itertools.product(range(n), repeat=3):
        v = dg(c, d, b) + dg(b, d, c) - dg(b, c, d)
        if not f.holonomic:
            v = v + Cg(None, b, c, d) - Cg(None, b, d, c) - Cg(None, c, d, b)
        if not v.is_zero():
            low[(d, b, c)] = v * half
    gamma = {}
    Ginv = g.inv_matrix
    for a, b, c in itertools.product(range(n), repeat=3):
        s = ZERO
        for d in range(n):
            gi = Ginv[a][d]
            if gi.is_zero():
                continue
            lv = low.get((d, b, c))
            if lv is not None:
                s = s + gi * lv
        if not s.is_zero():
            gamma[(a, b, c)] = s
    conn = Connection(f, gamma, g)
    _CACHE[id(g)] = (g, conn)
    return conn


class SpinConnection:
    """Coefficients ``Gamma^A_cB`` acting on spinor slots; the conjugate-spinor
    action uses their complex conjugates."""

    def __init__(self, frame: Frame, gamma: dict[tuple[int, int, int], Expr]):
        self.frame = frame
        self.gamma = {k: v for k, v in gamma.items() if not v.is_zero()}
        self.cgamma = {k: core.conjugate(v, frame.pairing) for k, v in self.gamma.items()}
        self.cgamma = {k: v for k, v in self.cgamma.items() if not v.is_zero()}

    def terms(self, space: str, c: int, e: int):
        src = self.gamma if space == S else self.cgamma
        return [(a, v) for (a, cc, ee), v in src.items() if cc == c and ee == e]


def covariant_derivative(t: Tensor, conn: Connection, spin: SpinConnection | None = None) -> Tensor:
    f = t.frame
    n = f.dim
    if any(s in (S, C) for s, _ in t.sig) and spin is None:
        raise GeometryError("spinor slots need a spin connection")
    out: dict[tuple, Expr] = {}

    def add(k, v):
        s = out.get(k)
        out[k] = v if s is None else s + v

    for k, v in t.comps.items():
        for c, dv in enumerate(f.grad(v)):
            if not dv.is_zero():
                add(k + (c,), dv)
    for p, (space, var) in enumerate(t.sig):
        for k, v in t.comps.items():
            e = k[p]
            for c in range(n):
                if space == T:
                    if var == UP:
                        for a, gv in conn.terms(c, e):  # + Gamma^a_ce T^e
                            add(k[:p] + (a,) + k[p + 1:] + (c,), gv * v)
                    else:
                        # -Gamma^e_cb T_e  -> contributes to index b
                        for b in range(n):
                            gv = conn[(e, c, b)]
                            if not gv.is_zero():
                                add(k[:p] + (b,) + k[p + 1:] + (c,), -gv * v)
                else:
                    if var == UP:
                        for a, gv in spin.terms(space, c, e):
                            add(k[:p] + (a,) + k[p + 1:] + (c,), gv * v)
                    else:
                        for b in range(2):
                            src = spin.gamma if space == S else spin.cgamma
                            gv = src.get((e, c, b))
                            if gv is not None:
                                add(k[:p] + (b,) + k[p + 1:] + (c,), -gv * v)
    return Tensor(f, t.sig + ((T, DOWN),), out)


def lie_derivative(X: Tensor, t: Tensor) -> Tensor:
    """Lie derivative of a tangent-index tensor along the vector field X."""
    if X.sig != ((T, UP),):
        raise GeometryError("lie_derivative needs a vector field")
    if X.frame is not t.frame:
        raise GeometryError("vector field and tensor live on different frames")
    f = t.frame
    n = f.dim
    if any(s != T for s, _ in t.sig):
        raise GeometryError("lie_derivative handles tangent slots only")
    Xc = [X[i] for i in range(n)]
    # A^b_a = E_a(X^b) + X^c C^b_ac
    A = [[ZERO] * n for _ in range(n)]
    for b in range(n):
        grad = f.grad(Xc[b])
        for a in range(n):
            s = grad[a]
            if not f.holonomic:
                for c in range(n):
                    cc = f.C(b, a, c)
                    if not cc.is_zero() and not Xc[c].is_zero():
                        s = s + Xc[c] * cc
            A[b][a] = s
    out: dict[tuple, Expr] = {}

    def add(k, v):
        s = out.get(k)
        out[k] = v if s is None else s + v

    for k, v in t.comps.items():
        dv = ZERO
        for c, g in enumerate(f.grad(v)):
            if not g.is_zero() and not Xc[c].is_zero():
                dv = dv + Xc[c] * g
        if not dv.is_zero():
            add(k, dv)
        for p, (_, var) in enumerate(t.sig):
            e = k[p]
            for a in range(n):
                if var == DOWN:
                    m = A[e][a]
                    if not m.is_zero():
                        add(k[:p] + (a,) + k[p + 1:], v * m)
                else:
                    m = A[a][e]
                    if not m.is_zero():
                        add(k[:p] + (a,) + k[p + 1:], -v * m)
    return Tensor(f, t.sig, out)


def exterior_derivative(w: Tensor) -> Tensor:
    """d of a differential form given by its alternating component array."""
    if any(s != (T, DOWN) for s in w.sig):
        raise GeometryError("exterior derivative needs a covariant form")
    f = w.frame
    p = w.rank
    if p > 1 and symmetrize(w, list(range(p)), "skew") != w:
        raise GeometryError("input is not alternating")
    n = f.dim
    out: dict[tuple, Expr] = {}
    for idx in itertools.combinations(range(n), p + 1):
        s = ZERO
        for i in range(p + 1):
            rest = idx[:i] + idx[i + 1:]
            v = w[rest]
            if not v.is_zero():
                d = f.apply(idx[i], v)
                if not d.is_zero():
                    s = s + d if i % 2 == 0 else s - d
        if not f.holonomic:
            for i in range(p + 1):
                for j in range(i + 1, p + 1):
                    rest = idx[:i] + idx[i + 1:j] + idx[j + 1:]
                    for k in range(n):
                        c = f.C(k, idx[i], idx[j])
                        if c.is_zero():
                            continue
                        v = w[(k,) + rest]
                        if not v.is_zero():
                            term = c * v
                            s = s + term if (i + j) % 2 == 0 else s - term
        if not s.is_zero():
            for perm in itertools.permutations(range(p + 1)):
                sign = _sign(perm)
                out[tuple(idx[q] for q in perm)] = s if sign > 0 else -s
    return Tensor(f, ((T, DOWN),) * (p + 1), out)


def _sign(p) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

def riemann(g: Metric) -> Tensor:
    conn = christoffel(g)
    f = g.frame
    n = f.dim
    gam = conn.gamma
    dgam = {}
    for (a, d, b), v in gam.items():
        for c, dv in enumerate(f.grad(v)):
            if not dv.is_zero():
                dgam[(c, a, d, b)] = dv
    out = {}
    for a, b, c, d in itertools.product(range(n), repeat=4):
        if c >= d:
            continue
        s = dgam.get((c, a, d, b), ZERO) - dgam.get((d, a, c, b), ZERO)
        for e in range(n):
            x, y = gam.get((a, c, e)), gam.get((e, d, b))
            if x is not None and y is not None:
                s = s + x * y
            x, y = gam.get((a, d, e)), gam.get((e, c, b))
            if x is not None and y is not None:
                s = s - x * y
            if not f.holonomic:
                cc = f.C(e, c, d)
                y = gam.get((a, e, b))
                if not cc.is_zero() and y is not None:
                    s = s - cc * y
        if not s.is_zero():
            out[(a, b, c, d)] = s
            out[(a, b, d, c)] = -s
    return Tensor(f, ((T, UP), (T, DOWN), (T, DOWN), (T, DOWN)), out)


def ricci(g: Metric, R: Tensor | None = None) -> Tensor:
    R = R if R is not None else riemann(g)
    return contract(R, [(0, 2)])


def ricci_scalar(g: Metric, Ric: Tensor | None = None) -> Expr:
    Ric = Ric if Ric is not None else ricci(g)
    s = ZERO
    for (a, b), v in Ric.comps.items():
        gi = g.inv_matrix[a][b]
        if not gi.is_zero():
            s = s + gi * v
    return s


def einstein(g: Metric, Ric: Tensor | None = None) -> Tensor:
    """Einstein tensor with both indices up."""
    Ric = Ric if Ric is not None else ricci(g)
    Rs = ricci_scalar(g, Ric)
    Rup = raise_lower(raise_lower(Ric, g, [0]), g, [1])
    return Rup - g.inverse.scale(Rs * Fraction(1, 2))


def lower_first(R: Tensor, g: Metric) -> Tensor:
    return raise_lower(R, g, [0])


def weyl(g: Metric, R: Tensor | None = None) -> Tensor:
    """Weyl tensor C^a_bcd (same slot layout as the Riemann tensor)."""
    n = g.frame.dim
    if n < 3:
        raise GeometryError("Weyl tensor needs dimension >= 3")
    R = R if R is not None else riemann(g)
    Ric = contract(R, [(0, 2)])
    Rs = ricci_scalar(g, Ric)
    Rl = raise_lower(R, g, [0])
    G = g.matrix
    k1 = Fraction(1, n - 2)
    k2 = Rs * Fraction(1, (n - 1) * (n - 2))
    out = {}
    for a, b, c, d in itertools.product(range(n), repeat=4):
        if a >= b or c >= d:
            continue
        v = Rl[a, b, c, d]
        t = G[a][c] * Ric[b, d] - G[a][d] * Ric[b, c] - G[b][c] * Ric[a, d] + G[b][d] * Ric[a, c]
        v = v - t * k1 + k2 * (G[a][c] * G[b][d] - G[a][d] * G[b][c])
        if not v.is_zero():
            out[(a, b, c, d)] = v
            out[(b, a, c, d)] = -v
            out[(a, b, d, c)] = -v
            out[(b, a, d, c)] = v
    Cl = Tensor(g.frame, ((T, DOWN),) * 4, out)
    return raise_lower(Cl, g, [0])


def curvature_suite(g: Metric) -> dict:
    R = riemann(g)
    Ric = ricci(g, R)
    Rs = ricci_scalar(g, Ric)
    out = {"riemann": R, "ricci": Ric, "ricci_scalar": Rs, "einstein": einstein(g, Ric)}
    if g.frame.dim == 4:
        out["weyl"] = weyl(g, R)
    return out


# --------------------------------------------------------------------------
# matter
# --------------------------------------------------------------------------

def energy_momentum(kind: str, g: Metric, *fields) -> Tensor:
    """Contravariant energy-momentum tensor for the given matter model."""
    kind = kind.lower()
    ginv = g.inverse
    if kind == "electromagnetic":
        (F,) = fields
        if F.sig != ((T, DOWN), (T, DOWN)):
            raise GeometryError("electromagnetic field must be a 2-form")
        Fuu = raise_lower(raise_lower(F, g, [0]), g, [1])       # F^{ab}
        Fud = raise_lower(F, g, [0])                            # F^a_b
        first = contract(tensor_product(Fuu, Fud), [(1, 3)])    # F^{ac} F^b_c
        F2 = contract(contract(tensor_product(Fuu, F), [(0, 2)]), [(0, 1)]).value()
        return first - ginv.scale(F2 * Fraction(1, 4))
    if kind == "dust":
        rho, u = fields
        return tensor_product(u, u).scale(as_expr(rho))
    if kind in ("perfect-fluid", "perfectfluid", "fluid"):
        rho, p, u = fields
        return tensor_product(u, u).scale(as_expr(rho) + as_expr(p)) + ginv.scale(as_expr(p))
    if kind == "scalar":
        (phi,) = fields
        f = g.frame
        dphi = Tensor(f, ((T, DOWN),), {(i,): d for i, d in enumerate(f.grad(as_expr(phi)))})
        up = raise_lower(dphi, g, [0])
        sq = contract(tensor_product(up, dphi), [(0, 1)]).value()
        return tensor_product(up, up) - ginv.scale(sq * Fraction(1, 2))
    raise GeometryError(f"unknown matter kind {kind!r}")


def divergence(t: Tensor, g: Metric) -> Tensor:
    """nabla_b t^{ab...b} contracted on the last upper slot."""
    D = covariant_derivative(t, christoffel(g))
    return contract(D, [(t.rank - 1, t.rank)])


def matter_field_equations(kind: str, g: Metric, *fields) -> tuple[Tensor, ...]:
    kind = kind.lower()
    if kind != "electromagnetic":
        raise GeometryError(f"field equations are implemented for electromagnetic fields only, not {kind!r}")
    (F,) = fields
    Fuu = raise_lower(raise_lower(F, g, [0]), g, [1])
    return divergence(Fuu, g), exterior_derivative(F)


def einstein_residual(g: Metric, Lam=None, T_: Tensor | None = None) -> Tensor:
    """G^{ab} + Lambda g^{ab} - T^{ab} (each optional term omitted when None)."""
    G = einstein(g)
    if Lam is not None:
        G = G + g.inverse.scale(as_expr(Lam))
    if T_ is not None:
        G = G - T_
    return G
