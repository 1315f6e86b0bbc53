"""Finite-dimensional Lie algebras with exact structure constants.

Vectors of the algebra are coefficient lists over the basis ``e1..en``.  The
structure constants satisfy ``[e_i, e_j] = sum_k c[k, i, j] e_k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .expr import core
from .expr.core import Atom, Expr, ONE, ZERO, UnsupportedError, as_expr
from .expr.linear import nullspace
from .invariants import get_components, isometry_dimension_at_point
from .manifold import GeometryError, Metric, Tensor, commutator, mat_det, raise_lower, to_chart
from .curvature import christoffel, covariant_derivative


class LieAlgebraError(GeometryError):
    pass


# --------------------------------------------------------------------------
# row reduction over the expression field
# --------------------------------------------------------------------------

def _rref(rows: Sequence[Sequence[Expr]], ncols: int, order: Sequence[int] | None = None):
    """Reduced row echelon form; returns (rows, pivot columns).

    ``order`` is the column preference for pivots (default left to right).
    """
    order = list(order) if order is not None else list(range(ncols))
    work = [[as_expr(e) for e in r] for r in rows]
    out: list[list[Expr]] = []
    pivots: list[int] = []
    for col in order:
        pick = None
        for i, r in enumerate(work):
            if not r[col].is_zero():
                if pick is None or (r[col].is_constant() and not work[pick][col].is_constant()):
                    pick = i
        if pick is None:
            continue
        prow = work.pop(pick)
        inv = prow[col].inverse()
        prow = [e * inv for e in prow]
        def elim(r):
            c = r[col]
            if c.is_zero():
                return r
            return [a - c * b for a, b in zip(r, prow)]
        work = [elim(r) for r in work]
        work = [r for r in work if any(not e.is_zero() for e in r)]
        out = [elim(r) for r in out]
        out.append(prow)
        pivots.append(col)
    return out, pivots


def _rank(rows, n) -> int:
    return len(_rref(rows, n)[1]) if rows else 0


# --------------------------------------------------------------------------
# algebras and subspaces
# --------------------------------------------------------------------------

class LieAlgebra:
    def __init__(self, n: int, constants: Mapping[tuple[int, int, int], object],
                 labels: Sequence[str] | None = None, check: bool = True):
        self.n = n
        self.labels = list(labels) if labels else [f"e{i + 1}" for i in range(n)]
        c: dict[tuple[int, int, int], Expr] = {}
        for (k, i, j), v in constants.items():
            v = as_expr(v)
            if v.is_zero():
                continue
            if (k, j, i) in constants and not (as_expr(constants[(k, j, i)]) + v).is_zero():
                raise LieAlgebraError(f"structure constants not antisymmetric at {(k, i, j)}")
            c[(k, i, j)] = v
            c[(k, j, i)] = -v
        self.c = c
        if check:
            bad = self.jacobi_defect()
            if bad:
                raise LieAlgebraError(f"Jacobi identity fails for {bad}")

    def basis(self, i: int) -> list[Expr]:
        return [ONE if k == i else ZERO for k in range(self.n)]

    def bracket(self, x: Sequence, y: Sequence) -> list[Expr]:
        out = [ZERO] * self.n
        for (k, i, j), v in self.c.items():
            a, b = x[i], y[j]
            if a.is_zero() or b.is_zero():
                continue
            out[k] = out[k] + v * a * b
        return out

    def ad(self, x: Sequence) -> list[list[Expr]]:
        """Matrix of ad x: column j is [x, e_j]."""
        M = [[ZERO] * self.n for _ in range(self.n)]
        for (k, i, j), v in self.c.items():
            if not x[i].is_zero():
                M[k][j] = M[k][j] + v * x[i]
        return M

    def jacobi_defect(self):
        n = self.n
        for i, j, k in itertools.combinations(range(n), 3):
            ei, ej, ek = self.basis(i), self.basis(j), self.basis(k)
            s = [a + b + d for a, b, d in zip(self.bracket(ei, self.bracket(ej, ek)),
                                                self.bracket(ej, self.bracket(ek, ei)),
                                                self.bracket(ek, self.bracket(ei, ej)))]
            if any(not e.is_zero() for e in s):
                return (i, j, k)
        return None

    def format_vector(self, x: Sequence[Expr]) -> str:
        terms = []
        for lab, e in zip(self.labels, x):
            if e.is_zero():
                continue
            if e == ONE:
                terms.append(lab)
            elif e == -ONE:
                terms.append(f"-{lab}")
            else:
                s = str(e)
                compound = " + " in s or " - " in s[1:]
                terms.append(f"({s})*{lab}" if compound else f"{s}*{lab}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    def bracket_table(self) -> list[tuple[int, int, list[Expr]]]:
        out = []
        for i, j in itertools.combinations(range(self.n), 2):
            v = self.bracket(self.basis(i), self.basis(j))
            if any(not e.is_zero() for e in v):
                out.append((i, j, v))
        return out

    def __str__(self):
        return "[" + ", ".join(f"[{self.labels[i]}, {self.labels[j]}] = {self.format_vector(v)}"
                               for i, j, v in self.bracket_table()) + "]"

    def __repr__(self):
        return f"LieAlgebra(n={self.n}, {self})"


@dataclass
class Subspace:
    parent: LieAlgebra
    rows: list[list[Expr]]
    parameters: list[Atom] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.rows)

    def __str__(self):
        return "[" + ", ".join(self.parent.format_vector(r) for r in self.rows) + "]"

    def contains(self, x: Sequence[Expr]) -> bool:
        return _rank(self.rows + [list(x)], self.parent.n) == _rank(self.rows, self.parent.n)


def span(L: LieAlgebra, vectors: Sequence[Sequence[Expr]]) -> Subspace:
    vecs = [list(map(as_expr, v)) for v in vectors if any(not as_expr(e).is_zero() for e in v)]
    rows, _ = _rref(vecs, L.n)
    return Subspace(L, rows)


def bracket_span(L: LieAlgebra, A: Subspace, B: Subspace) -> Subspace:
    return span(L, [L.bracket(a, b) for a in A.rows for b in B.rows])


def whole(L: LieAlgebra) -> Subspace:
    return Subspace(L, [L.basis(i) for i in range(L.n)])


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

def lie_algebra_data(fields: Sequence[Tensor], labels: Sequence[str] | None = None) -> LieAlgebra:
    """Structure constants of a finite set of vector fields closed under brackets."""
    n = len(fields)
    c = {}
    for i, j in itertools.combinations(range(n), 2):
        br = commutator(fields[i], fields[j])
        if br.is_zero():
            continue
        coeffs = get_components(br, list(fields), over="constants")
        if coeffs is None:
            raise LieAlgebraError(f"bracket of fields {i + 1} and {j + 1} is not in their span: {br}")
        for k, v in enumerate(coeffs):
            if not v.is_zero():
                c[(k, i, j)] = v
    return LieAlgebra(n, c, labels)


def killing_form(L: LieAlgebra) -> list[list[Expr]]:
    ads = [L.ad(L.basis(i)) for i in range(L.n)]
    n = L.n
    K = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            A, B = ads[i], ads[j]
            s = ZERO
            for a in range(n):
                for b in range(n):
                    if not A[a][b].is_zero() and not B[b][a].is_zero():
                        s = s + A[a][b] * B[b][a]
            K[i][j] = K[j][i] = s
    return K


def series(L: LieAlgebra, kind: str = "derived") -> list[Subspace]:
    """Derived or lower central series, ending at the first repeated term."""
    cur = whole(L)
    chain = [cur]
    while True:
        if kind == "derived":
            nxt = bracket_span(L, cur, cur)
        elif kind == "lower-central":
            nxt = bracket_span(L, whole(L), cur)
        else:
            raise LieAlgebraError(f"unknown series {kind!r}")
        chain.append(nxt)
        if nxt.dimension == cur.dimension or nxt.dimension == 0:
            return chain
        cur = nxt


def is_solvable(L: LieAlgebra, S: Subspace | None = None) -> bool:
    cur = S or whole(L)
    while cur.dimension:
        nxt = bracket_span(L, cur, cur)
        if nxt.dimension == cur.dimension:
            return False
        cur = nxt
    return True


def _coords_in(basis_rows, x, n):
    """Coefficients of x in the (independent) rows, or None."""
    m = len(basis_rows)
    cols = [list(r) for r in basis_rows] + [list(x)]
    rows = [{u: cols[u][k] for u in range(m + 1) if not cols[u][k].is_zero()} for k in range(n)]
    sp = nullspace(rows, [str(u) for u in range(m + 1)], m + 1)
    for v in sp.basis:
        if not v[m].is_zero():
            inv = -v[m].inverse()
            return [e * inv for e in v[:m]]
    return None


def radical(L: LieAlgebra) -> Subspace:
    """{x : K(x, [L, L]) = 0}, the solvable radical in characteristic zero."""
    K = killing_form(L)
    D = bracket_span(L, whole(L), whole(L))
    rows = [[sum((d[i] * K[i][j] for i in range(L.n)), ZERO) for j in range(L.n)] for d in D.rows]
    rows = [{j: e for j, e in enumerate(r) if not e.is_zero()} for r in rows]
    sp = nullspace(rows, L.labels, L.n)
    return span(L, sp.basis)


def levi_decomposition(L: LieAlgebra) -> tuple[Subspace, Subspace]:
    """(radical, Levi subalgebra) with exact Levi-Malcev correction."""
    R = radical(L)
    n = L.n
    if not is_solvable(L, R):
        raise LieAlgebraError("radical criterion produced a non-solvable ideal (defect)")
    if R.dimension == n:
        return R, Subspace(L, [])
    # complement: unit vectors on the non-pivot columns of the radical
    _, piv = _rref(R.rows, n)
    comp = [L.basis(j) for j in range(n) if j not in piv]
    m = len(comp)
    full = R.rows + comp   # adapted basis: radical first
    # quotient structure constants on the complement
    qc = {}
    for i, j in itertools.combinations(range(m), 2):
        co = _coords_in(full, L.bracket(comp[i], comp[j]), n)
        for k in range(m):
            v = co[R.dimension + k]
            if not v.is_zero():
                qc[(k, i, j)] = v
    Rser = [R]
    while Rser[-1].dimension:
        nxt = bracket_span(L, Rser[-1], Rser[-1])
        Rser.append(nxt)
    x = [list(v) for v in comp]
    for level in range(len(Rser) - 1):
        Rk, Rk1 = Rser[level], Rser[level + 1]
        d = _levi_defect(L, x, qc, m)
        if all(all(e.is_zero() for e in v) for v in d.values()):
            break
        # unknown corrections y_i in Rk; solve modulo Rk1
        adapted = Rk1.rows + _complement_rows(Rk1, Rk, n)
        base_k = _complement_rows(Rk1, Rk, n)
        nb = len(base_k)
        unknowns = m * nb
        eqs = []
        for (i, j), dv in d.items():
            # [x_i, y_j] + [y_i, x_j] - sum_k qc y_k = -d_ij   (mod Rk1)
            cols = []
            for u in range(unknowns):
                ii, b = divmod(u, nb)
                y = base_k[b]
                v = [ZERO] * n
                if ii == j:
                    v = [a + c for a, c in zip(v, L.bracket(x[i], y))]
                if ii == i:
                    v = [a + c for a, c in zip(v, L.bracket(y, x[j]))]
                coef = qc.get((ii, i, j))
                if coef is not None:
                    v = [a - coef * c for a, c in zip(v, y)]
                cols.append(v)
            cols.append(list(dv))
            eqs.append(cols)
        # project every vector on the Rk/Rk1 coordinates
        rows = []
        for cols in eqs:
            proj = [_coords_in(adapted + _complement_rows(Rk, whole(L), n), v, n) for v in cols]
            for t in range(len(Rk1.rows), len(adapted)):
                rows.append({u: proj[u][t] for u in range(unknowns + 1) if not proj[u][t].is_zero()})
        sp = nullspace(rows, [str(u) for u in range(unknowns + 1)], unknowns + 1)
        sol = None
        for v in sp.basis:
            if not v[unknowns].is_zero():
                inv = v[unknowns].inverse()
                sol = [e * inv for e in v[:unknowns]]
                break
        if sol is None:
            raise LieAlgebraError("Levi lifting failed (defect)")
        for u, s in enumerate(sol):
            ii, b = divmod(u, nb)
            if not s.is_zero():
                x[ii] = [a + s * c for a, c in zip(x[ii], base_k[b])]
    if any(any(not e.is_zero() for e in v) for v in _levi_defect(L, x, qc, m).values()):
        raise LieAlgebraError("Levi lifting did not converge (defect)")
    S = span(L, x)
    return R, S


def _complement_rows(small: Subspace, big: Subspace, n: int) -> list[list[Expr]]:
    """Rows of big completing small to a basis of big."""
    rows = list(small.rows)
    out = []
    for r in big.rows:
        if _rank(rows + [r], n) > len(rows):
            rows.append(r)
            out.append(r)
    return out


def _levi_defect(L, x, qc, m):
    d = {}
    for i, j in itertools.combinations(range(m), 2):
        v = L.bracket(x[i], x[j])
        for k in range(m):
            c = qc.get((k, i, j))
            if c is not None:
                v = [a - c * b for a, b in zip(v, x[k])]
        d[(i, j)] = v
    return d


# --------------------------------------------------------------------------
# isometry algebra from a point, isotropy
# --------------------------------------------------------------------------

def isometry_algebra(g: Metric, point: Mapping, depth: int = 3) -> LieAlgebra:
    kd = isometry_dimension_at_point(g, point, depth)
    c = {}
    for (i, j), coeffs in kd.brackets.items():
        for k, v in enumerate(coeffs):
            if not v.is_zero():
                c[(k, i, j)] = v
    return LieAlgebra(kd.dimension, c)


def _point_bindings(frame, point: Mapping):
    return {(frame.coords[frame.index_of(k)] if isinstance(k, str) else k): as_expr(v)
            for k, v in point.items()}


def isotropy_subalgebra(fields: Sequence[Tensor], point: Mapping):
    """(vector fields vanishing at the point, coefficient rows in the fields' basis)."""
    fields = [to_chart(f) for f in fields]
    frame = fields[0].frame
    pt = _point_bindings(frame, point)
    m = len(fields)
    rows = []
    for a in range(frame.dim):
        row = {u: fields[u][a].subs(pt) for u in range(m)}
        rows.append({u: e for u, e in row.items() if not e.is_zero()})
    sp = nullspace(rows, [f"e{u + 1}" for u in range(m)], m)
    coeffs, _ = _rref(sp.basis, m) if sp.basis else ([], [])
    vecs = []
    for c in coeffs:
        acc = None
        for u, e in enumerate(c):
            if e.is_zero():
                continue
            t = fields[u].scale(e)
            acc = t if acc is None else acc + t
        vecs.append(acc)
    return vecs, coeffs


@dataclass
class IsotropyType:
    label: str
    dimension: int
    invariants: list[tuple[Expr, Expr]]

    def __str__(self):
        return self.label


def _bivector_invariants(V: Tensor, g: Metric, pt) -> tuple[Expr, Expr]:
    n = g.frame.dim
    DV = covariant_derivative(V, christoffel(g))   # DV[a, c] = nabla_c V^a
    lam_low = raise_lower(DV, g, [0])               # [b, c] = nabla_c V_b
    lam = [[lam_low[b, c].subs(pt) for b in range(n)] for c in range(n)]  # lam[c][b] = nabla_c V_b
    Gi = [[e.subs(pt) for e in row] for row in g.inv_matrix]
    up = [[sum((Gi[a][c] * lam[c][d] * Gi[d][b] for c in range(n) for d in range(n)
                if not lam[c][d].is_zero()), ZERO) for b in range(n)] for a in range(n)]
    a_inv = sum((lam[i][j] * up[i][j] for i in range(n) for j in range(n)), ZERO) * ONE / 2
    det = mat_det([[e.subs(pt) for e in row] for row in g.matrix])
    vol = core.sqrt(-det if _sign(det) < 0 else det)
    s = ZERO
    for p in itertools.permutations(range(4)):
        sign = _perm_sign(p)
        a, b, c, d = p
        if up[a][b].is_zero() or up[c][d].is_zero():
            continue
        s = s + sign * up[a][b] * up[c][d]
    b_inv = s * vol / 4
    return a_inv, b_inv


def _perm_sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _sign(e: Expr) -> int:
    if e.is_zero():
        return 0
    return 1 if e.evalf({}).real > 0 else -1


def isotropy_type(fields: Sequence[Tensor], point: Mapping, g: Metric) -> IsotropyType:
    """Lorentz class of the isotropy at a point from the bivector nabla V(p)."""
    if g.frame.dim != 4:
        raise GeometryError("isotropy classification is for 4-dimensional spacetimes")
    vecs, _ = isotropy_subalgebra(fields, point)
    pt = _point_bindings(g.frame, point)
    invs = [_bivector_invariants(to_chart(V), g, pt) for V in vecs]
    if not vecs:
        return IsotropyType("trivial", 0, [])
    labels = [_classify_bivector(a, b) for a, b in invs]
    if len(vecs) == 1:
        return IsotropyType(labels[0], 1, invs)
    return IsotropyType(f"dimension {len(vecs)}: " + ", ".join(labels), len(vecs), invs)


def _classify_bivector(a: Expr, b: Expr) -> str:
    if not b.is_zero():
        return "ScrewRotation"
    s = _sign(a)
    if s > 0:
        return "Rotation (F12)"
    if s < 0:
        return "Boost"
    return "NullRotation"


# --------------------------------------------------------------------------
# complements and reductive pairs
# --------------------------------------------------------------------------

def complementary_basis(S: Subspace, parametric: bool = False, prefix: str = "t") -> Subspace:
    """A complement of S (pivoting on last nonzero columns); with ``parametric``
    the general complement ``u_i + sum_a t_ia s_a``."""
    L = S.parent
    n = L.n
    if S.dimension == 0:
        return whole(L)
    rows, piv = _rref(S.rows, n, order=list(range(n - 1, -1, -1)))
    units = [L.basis(j) for j in range(n) if j not in piv]
    if not parametric:
        return Subspace(L, units)
    params = []
    out = []
    k = 0
    for u in units:
        r = list(u)
        for s in S.rows:
            k += 1
            t = core.parameter(f"{prefix}{k}")
            params.append(t)
            r = [a + t.expr * b for a, b in zip(r, s)]
        out.append(r)
    return Subspace(L, out, params)


@dataclass
class ReductiveResult:
    verdict: bool
    solution: dict            # dependent parameter -> expression in the free ones
    free_parameters: list[Atom]
    complement: Subspace | None

    @property
    def free_parameter_count(self) -> int:
        return len(self.free_parameters)


def query_reductive_pair(h: Subspace, m: Subspace) -> ReductiveResult:
    """Impose [h, m] in m on a parametric complement m (parameters affine)."""
    L = h.parent
    n = L.n
    params = list(m.parameters)
    conds: list[Expr] = []
    for a in h.rows:
        for mi in m.rows:
            w = L.bracket(a, mi)
            if all(e.is_zero() for e in w):
                continue
            co = _coords_in(h.rows + m.rows, w, n)
            if co is None:
                raise LieAlgebraError("h + m does not span the algebra")
            conds.extend(c for c in co[:h.dimension] if not c.is_zero())
    rows = []
    k = len(params)
    for c in conds:
        num = c.numerator()
        for p in params:
            d = num.diff(p)
            if any(d.depends_on(q) for q in params):
                raise UnsupportedError(f"reductive condition {c} is not linear in the parameters")
        if any(c.denominator().depends_on(p) for p in params):
            raise UnsupportedError(f"reductive condition {c} has parameters in a denominator")
        coeffs = [num.diff(p) for p in params]
        const = num.subs({p: ZERO for p in params})
        rows.append(coeffs + [const])
    if not rows:
        return ReductiveResult(True, {}, params, m)
    red, piv = _rref(rows, k + 1)
    if k in piv:
        return ReductiveResult(False, {}, [], None)
    solution = {}
    free = [params[j] for j in range(k) if j not in piv]
    for r, pc in zip(red, piv):
        val = -r[k]
        for j in range(k):
            if j != pc and not r[j].is_zero():
                val = val - r[j] * params[j].expr
        solution[params[pc]] = val
    solved = Subspace(L, [[e.subs(solution) for e in row] for row in m.rows], free)
    return ReductiveResult(True, solution, free, solved)
