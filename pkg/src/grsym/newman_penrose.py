"""Newman-Penrose Weyl scalars, Petrov classification, tetrad transformations
and adapted tetrads.

Weyl scalars (calibrated so the Goedel tetrad reproduces (1/4, 0, 1/12, 0, 1/4))::

    Psi0 = C(l,m,l,m)    Psi1 = C(l,n,l,m)    Psi2 = C(l,m,mbar,n)
    Psi3 = C(l,n,mbar,n) Psi4 = C(n,mbar,n,mbar)

with ``C(X,Y,Z,W) = -eps0 * C_abcd X^a Y^b Z^c W^d`` where ``eps0`` is the sign
of g on timelike vectors, so both signature conventions give the same scalars
for the same geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .curvature import weyl
from .expr import core
from .expr.core import Expr, ZERO, UnsupportedError, as_expr
from .manifold import (GeometryError, Metric, Tensor, gram_schmidt, inner_product, null_tetrad,
                       raise_lower, to_chart)

@dataclass
class WeylScalars:
    psi: list[Expr]

    def __getitem__(self, i):
        return self.psi[i]

    def __iter__(self):
        return iter(self.psi)

    def subs(self, bindings) -> "WeylScalars":
        return WeylScalars([p.subs(bindings) for p in self.psi])

    def __str__(self):
        return ", ".join(f"Psi{i} = {p}" for i, p in enumerate(self.psi))


@dataclass
class PetrovResult:
    label: str
    trace: list[dict] = field(default_factory=list)

    def __str__(self):
        return self.label


def _lowered_weyl(g: Metric) -> Tensor:
    return raise_lower(weyl(g), g, [0])


_WCACHE: dict[int, tuple[Metric, Tensor]] = {}


def weyl_down(g: Metric) -> Tensor:
    hit = _WCACHE.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    W = _lowered_weyl(g)
    _WCACHE[id(g)] = (g, W)
    return W


def _contract4(W: Tensor, X, Y, Z, V, sign: int = 1) -> Expr:
    s = ZERO
    for (a, b, c, d), w in W.comps.items():
        x = X[a]
        if x.is_zero():
            continue
        y = Y[b]
        if y.is_zero():
            continue
        z = Z[c]
        if z.is_zero():
            continue
        v = V[d]
        if v.is_zero():
            continue
        s = s + w * x * y * z * v
    return s if sign == 1 else -s


def check_null_tetrad(tetrad: Sequence[Tensor], g: Metric) -> None:
    l, n, m, mb = tetrad
    zero_pairs = [(l, l), (n, n), (m, m), (mb, mb), (l, m), (l, mb), (n, m), (n, mb)]
    for a, b in zero_pairs:
        if not inner_product(g, a, b).is_zero():
            raise GeometryError("tetrad is not null-normalized")
    if inner_product(g, l, n).is_zero() or inner_product(g, m, mb).is_zero():
        raise GeometryError("tetrad is degenerate")


def np_weyl_scalars(tetrad: Sequence[Tensor], g: Metric, check: bool = True) -> WeylScalars:
    if check:
        check_null_tetrad(tetrad, g)
    l, n, m, mb = tetrad
    W = weyl_down(g)
    sg = -g.timelike_sign
    return WeylScalars([
        _contract4(W, l, m, l, m, sg),
        _contract4(W, l, n, l, m, sg),
        _contract4(W, l, m, mb, n, sg),
        _contract4(W, l, n, mb, n, sg),
        _contract4(W, n, mb, n, mb, sg),
    ])


# --------------------------------------------------------------------------
# tetrad construction and transformations
# --------------------------------------------------------------------------

def orthonormal_frame(g: Metric) -> list[Tensor]:
    """Orthonormal tetrad with the timelike vector first, by Gram-Schmidt over
    frame vectors (falling back to sums of pairs when a step is null)."""
    f = g.frame
    n = f.dim
    cands = [f.vector(i) for i in range(n)]
    cands += [f.vector(i) + f.vector(j) for i in range(n) for j in range(i + 1, n)]
    cands += [f.vector(i) - f.vector(j) for i in range(n) for j in range(i + 1, n)]
    chosen: list[Tensor] = []
    for v in cands:
        if len(chosen) == n:
            break
        try:
            es = gram_schmidt(chosen + [v], g)
        except GeometryError:
            continue
        chosen.append(v)
    if len(chosen) < n:
        raise GeometryError("could not build an orthonormal frame (degenerate metric)")
    es = gram_schmidt(chosen, g)
    tsign = g.timelike_sign
    norms = [inner_product(g, e, e) for e in es]
    ti = next(i for i, s in enumerate(norms) if s == as_expr(tsign))
    return [es[ti]] + [e for i, e in enumerate(es) if i != ti]


def tetrad_from_metric(g: Metric) -> list[Tensor]:
    return null_tetrad(orthonormal_frame(g))


def _conj(e: Expr, t: Tensor) -> Expr:
    return core.conjugate(as_expr(e), t.frame.pairing)


def null_rotation(tetrad: Sequence[Tensor], kind: str, parameter) -> list[Tensor]:
    """Lorentz transformation of (l, n, m, mbar).

    ``boost``: l -> p l, n -> n/p.  ``spin``: m -> p m with |p| = 1.
    ``null-about-l``: l fixed, m -> m + p l.  ``null-about-n``: n fixed, m -> m + p n.
    """
    l, n, m, mb = tetrad
    p = as_expr(parameter)
    pb = _conj(p, l)
    if kind == "boost":
        return [l.scale(p), n.scale(p.inverse()), m, mb]
    if kind == "spin":
        return [l, n, m.scale(p), mb.scale(pb)]
    if kind == "null-about-l":
        return [l, n + m.scale(pb) + mb.scale(p) + l.scale(p * pb), m + l.scale(p), mb + l.scale(pb)]
    if kind == "null-about-n":
        return [l + m.scale(pb) + mb.scale(p) + n.scale(p * pb), n, m + n.scale(p), mb + n.scale(pb)]
    raise GeometryError(f"unknown tetrad transformation {kind!r}")


def swap_ln(tetrad: Sequence[Tensor]) -> list[Tensor]:
    l, n, m, mb = tetrad
    return [n, l, mb, m]


# --------------------------------------------------------------------------
# Petrov classification
# --------------------------------------------------------------------------

def invariants_IJ(psi: Sequence[Expr]) -> tuple[Expr, Expr]:
    p0, p1, p2, p3, p4 = psi
    I = p0 * p4 - 4 * p1 * p3 + 3 * p2 * p2
    J = p4 * (p2 * p0 - p1 * p1) - p3 * (p3 * p0 - p1 * p2) + p2 * (p3 * p1 - p2 * p2)
    return I, J


def classify_scalars(psi: Sequence[Expr], trace: list | None = None) -> str:
    """Decision tree on scalars with Psi4 != 0 (or all zero)."""
    trace = trace if trace is not None else []
    p0, p1, p2, p3, p4 = psi
    if all(p.is_zero() for p in psi):
        trace.append({"step": "all Weyl scalars vanish", "result": "O"})
        return "O"
    I, J = invariants_IJ(psi)
    disc = I ** 3 - 27 * J ** 2
    trace.append({"step": "invariants", "I": str(I), "J": str(J), "I^3-27J^2": str(disc)})
    if not disc.is_zero():
        trace.append({"step": "I^3 - 27 J^2 != 0", "result": "I"})
        return "I"
    K = p1 * p4 * p4 - 3 * p2 * p3 * p4 + 2 * p3 ** 3
    L = p2 * p4 - p3 * p3
    N = 12 * L * L - p4 * p4 * I
    trace.append({"step": "secondary invariants", "K": str(K), "L": str(L), "N": str(N)})
    if I.is_zero() and J.is_zero():
        label = "N" if (K.is_zero() and L.is_zero()) else "III"
    else:
        label = "D" if (K.is_zero() and N.is_zero()) else "II"
    trace.append({"step": "decision", "result": label})
    return label


def _make_psi4_nonzero(tetrad, g, psi, trace):
    if not psi[4].is_zero():
        return tetrad, psi
    if not psi[0].is_zero():
        trace.append({"step": "Psi4 = 0, Psi0 != 0: exchange l and n"})
        t2 = swap_ln(tetrad)
        return t2, WeylScalars(list(reversed(list(psi))))
    for c in (1, 2, 3, -1, 5):
        t2 = null_rotation(tetrad, "null-about-l", c)
        psi2 = np_weyl_scalars(t2, g, check=False)
        if not psi2[4].is_zero():
            trace.append({"step": "Psi0 = Psi4 = 0: null rotation about l", "parameter": str(c)})
            return t2, psi2
    raise GeometryError("could not rotate the tetrad to Psi4 != 0")


def petrov_type(g: Metric, tetrad: Sequence[Tensor] | None = None, point: Mapping | None = None) -> PetrovResult:
    trace: list[dict] = []
    if tetrad is None:
        tetrad = tetrad_from_metric(g)
        trace.append({"step": "null tetrad built from the metric by Gram-Schmidt"})
    psi = np_weyl_scalars(tetrad, g)
    if point:
        psi = psi.subs(point)
        tetrad = [t.subs(point) for t in tetrad]
        trace.append({"step": "evaluated at point",
                      "point": {str(k): str(as_expr(v)) for k, v in point.items()}})
    trace.append({"step": "Weyl scalars", **{f"Psi{i}": str(p) for i, p in enumerate(psi)}})
    if all(p.is_zero() for p in psi):
        trace.append({"step": "all Weyl scalars vanish", "result": "O"})
        return PetrovResult("O", trace)
    if psi[4].is_zero():
        if not psi[0].is_zero():
            trace.append({"step": "Psi4 = 0, Psi0 != 0: exchange l and n"})
            psi = WeylScalars(list(reversed(list(psi))))
        else:
            # closed-form law for a null rotation about l with parameter c
            for c in (1, 2, 3, -1, 5):
                p0, p1, p2, p3, p4 = psi
                q = [p0,
                     p1 + c * p0,
                     p2 + 2 * c * p1 + c * c * p0,
                     p3 + 3 * c * p2 + 3 * c * c * p1 + c ** 3 * p0,
                     p4 + 4 * c * p3 + 6 * c * c * p2 + 4 * c ** 3 * p1 + c ** 4 * p0]
                if not q[4].is_zero():
                    trace.append({"step": "Psi0 = Psi4 = 0: null rotation about l", "parameter": str(c)})
                    psi = WeylScalars(q)
                    break
    label = classify_scalars(list(psi), trace)
    return PetrovResult(label, trace)


# --------------------------------------------------------------------------
# univariate polynomials over the expression field (for the Weyl quartic)
# --------------------------------------------------------------------------

def _trim(p):
    p = list(p)
    while p and p[-1].is_zero():
        p.pop()
    return p


def _pderiv(p):
    return _trim([p[i] * i for i in range(1, len(p))])


def _pmod(a, b):
    a, b = _trim(a), _trim(b)
    inv = b[-1].inverse()
    while len(a) >= len(b):
        c = a[-1] * inv
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = a[shift + i] - c * bc
        a = _trim(a)
    return a


def _pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _pmod(a, b)
    if not a:
        return a
    inv = a[-1].inverse()
    return [c * inv for c in a]


def _roots_low(p):
    p = _trim(p)
    if len(p) == 2:
        return [-p[0] / p[1]]
    if len(p) == 3:
        c, b, a = p
        disc = b * b - 4 * a * c
        s = core.sqrt(disc)
        return [(-b + s) / (2 * a), (-b - s) / (2 * a)]
    raise UnsupportedError("root extraction beyond quadratic factors needs a point")


def quartic_roots(psi: Sequence[Expr]) -> list[tuple[Expr, int]]:
    """Roots (with multiplicity) of Psi0 + 4 Psi1 z + 6 Psi2 z^2 + 4 Psi3 z^3 + Psi4 z^4
    that lie in the expression field or a single quadratic extension."""
    P = _trim([psi[0], 4 * psi[1], 6 * psi[2], 4 * psi[3], psi[4]])
    if not P:
        raise GeometryError("Weyl quartic vanishes identically")
    chain = [P]
    d = P
    while True:
        d = _pderiv(d)
        g = _pgcd(chain[-1], d) if d else []
        if len(g) <= 1:
            break
        chain.append(g)
    deepest = chain[-1]
    mult = len(chain)
    if mult == 1:
        roots = _roots_low(P)
        return [(r, 1) for r in roots]
    return [(r, mult) for r in _roots_low(deepest)]


def _verify(tetrad, g, want_zero: Sequence[int]):
    psi = np_weyl_scalars(tetrad, g, check=False)
    return all(psi[i].is_zero() for i in want_zero), psi


def adapted_null_tetrad(tetrad: Sequence[Tensor], g: Metric, label: str | None = None) -> list[Tensor]:
    """Rotate the tetrad so the Weyl scalars take the normal form of the type."""
    psi = np_weyl_scalars(tetrad, g)
    label = label or classify_scalars(list(psi) if not psi[4].is_zero() else list(psi))
    if label == "O":
        return list(tetrad)
    if label == "I":
        raise UnsupportedError("adapted tetrads for type I are not implemented")
    targets = {"D": (0, 1, 3, 4), "N": (0, 1, 2, 3), "III": (0, 1, 2, 4), "II": (0, 1, 3)}[label]
    ok, _ = _verify(tetrad, g, targets)
    if ok:
        return list(tetrad)
    if psi[4].is_zero():
        if not psi[0].is_zero():
            tetrad = swap_ln(tetrad)
        else:
            tetrad = null_rotation(tetrad, "null-about-l", 1)
        psi = np_weyl_scalars(tetrad, g, check=False)
    roots = quartic_roots(list(psi))
    roots.sort(key=lambda rm: -rm[1])
    for root, _m in roots:
        for use_conj in (False, True):
            b = _conj(root, tetrad[0]) if use_conj else root
            t1 = null_rotation(tetrad, "null-about-n", b)
            q = np_weyl_scalars(t1, g, check=False)
            if not q[0].is_zero():
                continue
            if label == "N":
                a = ZERO
            elif label == "III":
                a = -q[4] / (4 * q[3]) if not q[3].is_zero() else ZERO
            else:
                a = -q[3] / (3 * q[2]) if not q[2].is_zero() else ZERO
            for cand in (a, _conj(a, t1[0])):
                t2 = null_rotation(t1, "null-about-l", cand) if not cand.is_zero() else t1
                ok, _ = _verify(t2, g, targets)
                if ok:
                    return t2
    raise GeometryError("adapted tetrad construction failed verification")


def principal_null_directions(tetrad: Sequence[Tensor], g: Metric, label: str | None = None) -> list[Tensor]:
    """Distinct principal null directions, in the chart basis."""
    label = label or petrov_type(g, tetrad).label
    adapted = adapted_null_tetrad(tetrad, g, label)
    if label in ("D",):
        return [to_chart(adapted[0]), to_chart(adapted[1])]
    if label == "N":
        return [to_chart(adapted[0])]
    raise UnsupportedError(f"principal null directions for type {label}")
