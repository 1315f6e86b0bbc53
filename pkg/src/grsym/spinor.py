"""Two-component spinors on a 4-dimensional spacetime of signature (+,-,-,-).

Conventions: ``eps_12 = eps^12 = 1``; indices are raised as
``a^A = eps^AB a_B``.  The solder form built from an orthonormal tetrad with
coframe ``theta^i`` is ``sigma_a^{AA'} = 2^{-1/2} sum_i theta^i_a P_i^{AA'}``
with ``P_0`` the identity and ``P_1, P_2, P_3`` the Pauli matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .curvature import SpinConnection, christoffel, covariant_derivative, weyl
from .expr import core
from .expr.core import Expr, ONE, ZERO, UnsupportedError
from .manifold import (C, DOWN, S, T, UP, GeometryError, Metric, Tensor, dual_basis, inner_product,
                       mat_inverse, raise_lower, symmetrize, tensor_product, to_chart)
from .newman_penrose import _pderiv, _pgcd, _roots_low, _trim

_I = core.I
PAULI = [
    [[ONE, ZERO], [ZERO, ONE]],
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, -_I], [_I, ZERO]],
    [[ONE, ZERO], [ZERO, -ONE]],
]
EPS = [[ZERO, ONE], [-ONE, ZERO]]


def _require_spinors(frame):
    if frame.spinor_labels is None:
        raise GeometryError(f"frame {frame.name} has no spinor spaces; declare spinor labels")


def epsilon_spinor(frame, space: str = "spinor", variance: str = "cov") -> Tensor:
    """The skew spinor eps with eps_12 = 1 (and eps^12 = 1)."""
    _require_spinors(frame)
    sp = {"spinor": S, "barspinor": C, "conjugate": C}[space]
    var = {"cov": DOWN, "con": UP, "down": DOWN, "up": UP}[variance]
    return Tensor(frame, ((sp, var), (sp, var)), {(0, 1): ONE, (1, 0): -ONE})


@dataclass
class SolderForm:
    sigma: Tensor                 # (t,d)(s,u)(c,u)
    inverse: Tensor               # (t,u)(s,d)(c,d): sigma^a_{AA'}
    metric: Metric

    @property
    def frame(self):
        return self.sigma.frame


def _pair_index(A, B):
    return 2 * A + B


def solder_form(tetrad: Sequence[Tensor], g: Metric | None = None) -> SolderForm:
    """Solder form of an orthonormal tetrad (e0 timelike) for a (+,-,-,-) metric."""
    tetrad = [to_chart(e) for e in tetrad]
    frame = tetrad[0].frame
    _require_spinors(frame)
    if frame.dim != 4:
        raise GeometryError("spinors need a 4-dimensional spacetime")
    if g is not None:
        G = inner_product(g, tetrad, tetrad)
        want = [[(ONE if i == j == 0 else (-ONE if i == j else ZERO)) for j in range(4)] for i in range(4)]
        if G != want:
            flipped = [[-e for e in row] for row in want]
            if G == flipped:
                raise GeometryError("tetrad is orthonormal for signature (-,+,+,+); "
                                    "spinors need (+,-,-,-): negate the metric")
            raise GeometryError("tetrad is not orthonormal")
    theta = dual_basis(tetrad)
    r = core.sqrt(2).inverse()
    comps = {}
    for a in range(4):
        for A, Ap in itertools.product(range(2), repeat=2):
            s = ZERO
            for i in range(4):
                th, p = theta[i][a], PAULI[i][A][Ap]
                if not th.is_zero() and not p.is_zero():
                    s = s + th * p
            comps[(a, A, Ap)] = s * r
    sigma = Tensor(frame, ((T, DOWN), (S, UP), (C, UP)), comps)
    if g is None:
        g = Metric(spinor_inner_product(sigma, sigma))
    return SolderForm(sigma, _invert(sigma), g)


def _invert(sigma: Tensor) -> Tensor:
    M = [[sigma[a, A, Ap] for A in range(2) for Ap in range(2)] for a in range(4)]
    Minv = mat_inverse(M)  # Minv[(A,A')][a]
    comps = {}
    for A, Ap in itertools.product(range(2), repeat=2):
        for a in range(4):
            comps[(a, A, Ap)] = Minv[_pair_index(A, Ap)][a]
    return Tensor(sigma.frame, ((T, UP), (S, DOWN), (C, DOWN)), comps)


def spinor_inner_product(s1: Tensor, s2: Tensor) -> Tensor:
    """Contract the spinor slots of two solder-type tensors with eps and eps'."""
    sig = (T, DOWN), (S, UP), (C, UP)
    if s1.sig != sig or s2.sig != sig:
        raise GeometryError("spinor_inner_product expects (tangent-down, spinor-up, conjugate-up) tensors")
    comps = {}
    for a, b in itertools.product(range(4), repeat=2):
        s = ZERO
        for A, B, Ap, Bp in itertools.product(range(2), repeat=4):
            e = EPS[A][B] * EPS[Ap][Bp]
            if e.is_zero():
                continue
            x, y = s1[a, A, Ap], s2[b, B, Bp]
            if not x.is_zero() and not y.is_zero():
                s = s + e * x * y
        comps[(a, b)] = s
    return Tensor(s1.frame, ((T, DOWN), (T, DOWN)), comps)


def spin_connection(sf: SolderForm) -> SpinConnection:
    """Unique spin connection with nabla sigma = 0 (coefficients Gamma^A_cB)."""
    conn = christoffel(sf.metric)
    sigma, inv = sf.sigma, sf.inverse
    frame = sigma.frame
    gamma = {}
    for c in range(4):
        # D_c sigma_a^{AA'} with the tangent slot corrected only
        D = {}
        for a in range(4):
            for A, Ap in itertools.product(range(2), repeat=2):
                v = frame.apply(c, sigma[a, A, Ap])
                for b in range(4):
                    gv = conn[(b, c, a)]
                    if not gv.is_zero():
                        sb = sigma[b, A, Ap]
                        if not sb.is_zero():
                            v = v - gv * sb
                D[(a, A, Ap)] = v
        for A, B in itertools.product(range(2), repeat=2):
            N = ZERO
            for Ap in range(2):
                for a in range(4):
                    x, y = inv[a, B, Ap], D[(a, A, Ap)]
                    if not x.is_zero() and not y.is_zero():
                        N = N + x * y
            if not N.is_zero():
                gamma[(A, c, B)] = N * Fraction(-1, 2)
    return SpinConnection(frame, gamma)


def spinor_covariant_derivative(t: Tensor, sf: SolderForm, spin: SpinConnection | None = None) -> Tensor:
    spin = spin or spin_connection(sf)
    return covariant_derivative(t, christoffel(sf.metric), spin)


def weyl_spinor(sf: SolderForm) -> Tensor:
    """Totally symmetric Psi_ABCD with C_abcd sigma^a.. = Psi eps' eps' + c.c."""
    g = sf.metric
    Wl = raise_lower(weyl(g), g, [0])
    inv = sf.inverse
    # reduce C_abcd against sigma^a_{AA'} sigma^b_{BB'} eps^{A'B'} one pair at a time
    pair = {}
    for a, b in itertools.product(range(4), repeat=2):
        for A, B in itertools.product(range(2), repeat=2):
            s = ZERO
            for Ap, Bp in itertools.product(range(2), repeat=2):
                e = EPS[Ap][Bp]
                if e.is_zero():
                    continue
                x, y = inv[a, A, Ap], inv[b, B, Bp]
                if not x.is_zero() and not y.is_zero():
                    s = s + e * x * y
            if not s.is_zero():
                pair[(a, b, A, B)] = s
    half = {}
    for (a, b, c, d), w in Wl.comps.items():
        for C_, D_ in itertools.product(range(2), repeat=2):
            p = pair.get((c, d, C_, D_))
            if p is not None:
                key = (a, b, C_, D_)
                half[key] = half.get(key, ZERO) + w * p
    comps = {}
    for A, B, C_, D_ in itertools.product(range(2), repeat=4):
        s = ZERO
        for a, b in itertools.product(range(4), repeat=2):
            h = half.get((a, b, C_, D_))
            p = pair.get((a, b, A, B))
            if h is not None and p is not None:
                s = s + h * p
        comps[(A, B, C_, D_)] = s * Fraction(1, 4)
    return Tensor(sf.frame, ((S, DOWN),) * 4, comps)


def raise_spinor(t: Tensor, positions: Sequence[int]) -> Tensor:
    """a^A = eps^AB a_B on the given spinor (or conjugate) slots; inverse for up slots."""
    for p in positions:
        space, var = t.sig[p]
        if space == T:
            raise GeometryError("use raise_lower for tangent slots")
        out = {}
        for k, v in t.comps.items():
            B = k[p]
            for A in range(2):
                # up: a^A = eps^{AB} a_B ; down: a_B = a^A eps_{AB}
                e = EPS[A][B] if var == DOWN else EPS[B][A]
                if e.is_zero():
                    continue
                nk = k[:p] + (A,) + k[p + 1:]
                out[nk] = out.get(nk, ZERO) + e * v
        sig = list(t.sig)
        sig[p] = (space, UP if var == DOWN else DOWN)
        t = Tensor(t.frame, sig, out)
    return t


def spinor_tensor_convert(s: Tensor, sf: SolderForm, pairs: Sequence[tuple[int, int]]) -> Tensor:
    """Exchange each (spinor, conjugate-spinor) slot pair for a tangent slot.

    The pair ``(i, j)`` (0-based) must hold a spinor slot and a conjugate slot of
    equal variance; the tangent slot replaces position ``i``.
    """
    t = s
    for (i, j) in sorted(pairs, key=lambda ij: -max(ij)):
        si, sj = t.sig[i], t.sig[j]
        if {si[0], sj[0]} != {S, C} or si[1] != sj[1]:
            raise GeometryError(f"slots {i} and {j} are not a spinor/conjugate pair of equal variance")
        if si[0] == C:
            i, j = j, i
        var = si[1]
        M = sf.inverse if var == UP else sf.sigma
        out = {}
        for k, v in t.comps.items():
            A, Ap = k[i], k[j]
            for a in range(4):
                m = M[a, A, Ap]
                if m.is_zero():
                    continue
                nk = list(k)
                nk[i] = a
                del nk[j]
                nk = tuple(nk)
                out[nk] = out.get(nk, ZERO) + m * v
        sig = list(t.sig)
        sig[i] = (T, var)
        del sig[j]
        t = Tensor(t.frame, sig, out)
    return t


def tensor_to_spinor(t: Tensor, sf: SolderForm, positions: Sequence[int]) -> Tensor:
    """Replace tangent slots by (spinor, conjugate) pairs via the solder form."""
    for p in sorted(positions, reverse=True):
        space, var = t.sig[p]
        if space != T:
            raise GeometryError("tensor_to_spinor acts on tangent slots")
        M = sf.sigma if var == UP else sf.inverse
        out = {}
        for k, v in t.comps.items():
            a = k[p]
            for A, Ap in itertools.product(range(2), repeat=2):
                m = M[a, A, Ap]
                if m.is_zero():
                    continue
                nk = k[:p] + (A, Ap) + k[p + 1:]
                out[nk] = out.get(nk, ZERO) + m * v
        sig = list(t.sig)
        sig[p:p + 1] = [(S, var), (C, var)]
        t = Tensor(t.frame, sig, out)
    return t


# --------------------------------------------------------------------------
# principal spinors
# --------------------------------------------------------------------------

def weyl_quartic(W: Tensor) -> list[Expr]:
    """Coefficients of Psi(1, z) = W_ABCD xi^A xi^B xi^C xi^D with xi = (1, z)."""
    return [W[0, 0, 0, 0], 4 * W[0, 0, 0, 1], 6 * W[0, 0, 1, 1], 4 * W[0, 1, 1, 1], W[1, 1, 1, 1]]


def _durand_kerner(coeffs: Sequence[complex]) -> list[complex]:
    c = list(coeffs)
    while c and abs(c[-1]) < 1e-14:
        c.pop()
    n = len(c) - 1
    if n <= 0:
        return []
    lead = c[-1]
    a = [x / lead for x in c]
    roots = [(0.4 + 0.9j) ** k for k in range(n)]
    for _ in range(500):
        new = []
        for i, r in enumerate(roots):
            num = sum(a[k] * r ** k for k in range(n + 1))
            den = 1
            for j, s in enumerate(roots):
                if j != i:
                    den *= (r - s)
            new.append(r - num / den if den != 0 else r + 1e-6)
        if max(abs(x - y) for x, y in zip(new, roots)) < 1e-15:
            roots = new
            break
        roots = new
    return roots


def _exact_roots(P: list[Expr]) -> list[tuple[Expr, int]]:
    """All roots with multiplicity where each factor is at most quadratic."""
    P = _trim(P)
    out: list[tuple[Expr, int]] = []
    remaining = P
    while len(remaining) > 1:
        chain = [remaining]
        d = remaining
        while True:
            d = _pderiv(d)
            g = _pgcd(chain[-1], d) if d else []
            if len(g) <= 1:
                break
            chain.append(g)
        base = chain[-1]
        mult = len(chain)
        if len(base) > 3:
            raise UnsupportedError("Weyl spinor factorization needs a point")
        rts = _roots_low(base)
        for r in rts:
            out.append((r, mult))
            # divide remaining by (z - r)^mult
            for _ in range(mult):
                remaining = _synthetic_div(remaining, r)
    return out


def _synthetic_div(p: list[Expr], r: Expr) -> list[Expr]:
    n = len(p) - 1
    q = [ZERO] * n
    acc = ZERO
    for k in range(n, 0, -1):
        acc = p[k] + acc * r
        q[k - 1] = acc
    return _trim(q)


def _spinor_from_root(frame, r: Expr | None) -> Tensor:
    """Covariant alpha with alpha_A xi^A = 0 at xi = (1, r) (r None: xi = (0, 1))."""
    if r is None:
        return Tensor(frame, ((S, DOWN),), {(0,): ONE})
    return Tensor(frame, ((S, DOWN),), {(0,): -r, (1,): ONE})


def _sym_product(spinors: Sequence[Tensor]) -> Tensor:
    t = spinors[0]
    for s in spinors[1:]:
        t = tensor_product(t, s)
    return symmetrize(t, list(range(len(spinors))), "symmetric")


def factor_weyl_spinor(W: Tensor, label: str | None = None, point: Mapping | None = None):
    """Principal spinors and scale eta with Sym(alpha x beta x gamma x delta) = eta W.

    Type D output has the form ``[alpha, alpha, beta, beta]`` with
    ``eps^AB alpha_A beta_B = 1``.  Symbolic roots are used when the Weyl
    quartic splits into at most quadratic factors; otherwise a point is needed
    and numeric (floating) coefficients are returned.
    """
    frame = W.frame
    if point:
        W = W.subs(point)
    if W.is_zero():
        raise GeometryError("Weyl spinor vanishes (type O)")
    P = weyl_quartic(W)
    deg = len(_trim(P)) - 1
    try:
        roots = _exact_roots(P)
    except UnsupportedError:
        if not point:
            raise
        return _numeric_factor(W, P)
    inf_mult = 4 - deg
    entries: list[tuple[Expr | None, int]] = list(roots)
    if inf_mult:
        entries.append((None, inf_mult))
    entries.sort(key=lambda rm: (-rm[1], rm[0] is None, str(rm[0])))
    spinors = [_spinor_from_root(frame, r) for r, m in entries for _ in range(m)]
    if label == "D" or (len(entries) == 2 and entries[0][1] == 2 and entries[1][1] == 2):
        a = _spinor_from_root(frame, entries[0][0])
        b = _spinor_from_root(frame, entries[1][0])
        pairing = a[0] * b[1] - a[1] * b[0]
        b = b.scale(pairing.inverse())
        spinors = [a, a, b, b]
    prod = _sym_product(spinors)
    k = next(iter(W.comps))
    eta = prod[k] / W[k]
    if prod != W.scale(eta):
        raise GeometryError("principal spinor verification failed")
    return spinors, eta


def _numeric_factor(W: Tensor, P):
    vals = [complex(p.evalf({})) for p in P]
    roots = _durand_kerner(vals)
    raise_inf = 4 - len(roots)
    spinors = [[-r, 1] for r in roots] + [[1, 0]] * raise_inf
    return spinors, None


def principal_spinor_counts(W: Tensor) -> list[int]:
    P = weyl_quartic(W)
    deg = len(_trim(P)) - 1
    mults = sorted([m for _, m in _exact_roots(P)] + ([4 - deg] if deg < 4 else []), reverse=True)
    return mults
