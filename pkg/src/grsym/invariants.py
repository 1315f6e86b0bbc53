"""Ansatz-reduced solvers for symmetry equations.

Every solver here follows one pattern.  The unknown field is expanded over a
finite :class:`AnsatzBasis` with constant coefficients; the defining operator
(Lie derivative, symmetrized covariant derivative, commutator) is linear, so it
is evaluated once per basis field.  Each residual component is then split over
the monomials in coordinate-dependent atoms, which turns the PDE into a linear
system over the constants.  Completeness is therefore relative to the ansatz;
:func:`isometry_dimension_at_point` gives an independent count of Killing
vectors that flags an ansatz that is too small.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .curvature import covariant_derivative, christoffel, lie_derivative, riemann
from .expr import core
from .expr.core import Atom, Expr, ONE, ZERO, UnsupportedError, as_expr
from .expr.linear import nullspace
from .manifold import (DOWN, T, UP, GeometryError, Metric, Tensor, commutator, contract,
                       raise_lower, symmetrize, tensor_product, to_chart)


class AnsatzError(GeometryError):
    """The ansatz is unusable: dependent functions or not derivative-closed."""


# --------------------------------------------------------------------------
# reduction of functional identities to constant linear systems
# --------------------------------------------------------------------------

def _variable_indices(coords: Sequence[Atom]) -> Callable[[int], bool]:
    cset = frozenset(coords)
    cache: dict[int, bool] = {}
    table = core._atoms

    def is_var(i: int) -> bool:
        hit = cache.get(i)
        if hit is None:
            a = table[i]
            hit = cache[i] = bool(a.variables() & cset) or a in cset
        return hit

    return is_var


def _lcm(p, q):
    if p == q:
        return p
    return p * (q / p.gcd(q))


def _split_columns(entries: Mapping[int, Expr], is_var) -> dict[tuple, dict[int, Expr]]:
    """Rows of constant coefficients for ``sum_u c_u entries[u] == 0`` to hold
    identically in the coordinate-dependent atoms."""
    D = None
    for e in entries.values():
        D = e.den if D is None else _lcm(D, e.den)
    rows: dict[tuple, dict[int, dict]] = {}
    for u, e in entries.items():
        num = e.num if e.den == D else e.num * (D / e.den)
        for exps, c in num.terms():
            var = tuple(x if (x and is_var(i)) else 0 for i, x in enumerate(exps))
            cst = tuple(x if (x and not is_var(i)) else 0 for i, x in enumerate(exps))
            bucket = rows.setdefault(var, {}).setdefault(u, {})
            bucket[cst] = bucket.get(cst, 0) + c
    out: dict[tuple, dict[int, Expr]] = {}
    one = core._const_poly(1)
    for var, cols in rows.items():
        row = {}
        for u, terms in cols.items():
            if len(terms) == 1 and not any(next(iter(terms))):
                val = core._as_expr(next(iter(terms.values())))
            else:
                val = core._finish(core._ctx.from_dict({k: v for k, v in terms.items() if v != 0}), one)
            if not val.is_zero():
                row[u] = val
        if row:
            out[var] = row
    return out


def constant_relations(columns: Sequence[Sequence[Expr] | Mapping], coords: Sequence[Atom],
                       parameters: Sequence[Atom] | None = None):
    """Null space over the constants of a family of residual columns.

    ``columns[u]`` maps component keys to the residual of the ``u``-th unknown.
    Returns the :class:`~grsym.expr.linear.LinearSolutionSpace` of constant
    coefficient vectors ``c`` with ``sum_u c_u columns[u] = 0`` identically.
    """
    is_var = _variable_indices(coords)
    by_key: dict = {}
    for u, col in enumerate(columns):
        items = col.items() if isinstance(col, Mapping) else enumerate(col)
        for k, e in items:
            e = as_expr(e)
            if not e.is_zero():
                by_key.setdefault(k, {})[u] = e
    rows = []
    for entries in by_key.values():
        rows.extend(_split_columns(entries, is_var).values())
    n = len(columns)
    return nullspace(rows, [f"c{u}" for u in range(n)], n, parameters)


# --------------------------------------------------------------------------
# ansatz bases
# --------------------------------------------------------------------------

@dataclass
class AnsatzBasis:
    """Finite set of scalar functions spanning each unknown component."""

    functions: list[Expr]
    coords: list[Atom]

    def __post_init__(self):
        self.functions = [as_expr(f) for f in self.functions]
        if any(f.is_zero() for f in self.functions):
            raise AnsatzError("zero function in ansatz")
        space = constant_relations([[f] for f in self.functions], self.coords)
        if space.dimension:
            raise AnsatzError("ansatz functions are linearly dependent over the constants")

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    @classmethod
    def independent(cls, functions: Sequence, coords: Sequence[Atom]) -> "AnsatzBasis":
        """Keep the first maximal independent subset of ``functions``."""
        kept: list[Expr] = []
        for f in functions:
            f = as_expr(f)
            if f.is_zero():
                continue
            trial = kept + [f]
            if not constant_relations([[g] for g in trial], coords).dimension:
                kept = trial
        return cls(kept, list(coords))

    @classmethod
    def polynomial(cls, coords: Sequence[Atom], degree: int) -> "AnsatzBasis":
        return cls(monomials(coords, degree), list(coords))

    def missing_derivatives(self) -> list[Expr]:
        """Coordinate derivatives of ansatz functions outside its constant span."""
        missing = []
        for f in self.functions:
            for x in self.coords:
                d = f.diff(x)
                if d.is_zero():
                    continue
                cols = [[g] for g in self.functions] + [[d]]
                space = constant_relations(cols, self.coords)
                if not any(not v[-1].is_zero() for v in space.basis):
                    if all(d != m for m in missing):
                        missing.append(d)
        return missing

    def require_closed(self):
        missing = self.missing_derivatives()
        if missing:
            raise AnsatzError("ansatz is not closed under coordinate derivatives; missing: "
                              + ", ".join(str(m) for m in missing))


def monomials(coords: Sequence[Atom], degree: int) -> list[Expr]:
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(coords, d):
            m = ONE
            for x in combo:
                m = m * x.expr
            out.append(m)
    return out


def default_ansatz(g: Metric, degree: int = 2, power: int = 2) -> AnsatzBasis:
    """Monomials to ``degree`` times each transcendental atom of g and g^-1 to
    powers in ``[-power, power]``."""
    coords = g.frame.coords
    cset = set(coords)
    found = set()
    for M in (g.matrix, g.inv_matrix):
        for row in M:
            for e in row:
                for a in e.atoms():
                    if a.kind in core.TRANSCENDENTAL and a.variables() & cset:
                        found.add(a)
    factors = [ONE]
    for a in sorted(found, key=lambda a: a.sort_key):
        for k in range(1, power + 1):
            factors.append(a.expr ** k)
            if a.kind == core.EXP:
                factors.append(a.expr ** -k)
    base = monomials(coords, degree)
    return AnsatzBasis.independent([m * f for f in factors for m in base], coords)


# --------------------------------------------------------------------------
# solution spaces of fields
# --------------------------------------------------------------------------

@dataclass
class FieldSpace:
    """Basis of the constant-coefficient solutions found inside an ansatz."""

    fields: list[Tensor]
    ansatz: AnsatzBasis | None = None
    branches: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.fields)

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __getitem__(self, i):
        return self.fields[i]


def _slot_keys(frame, sig, symmetry: str | None):
    ranges = [range(frame.space_dim(s)) for s, _ in sig]
    if symmetry is None:
        return [(k, {k: 1}) for k in itertools.product(*ranges)]
    n = frame.dim
    r = len(sig)
    out = []
    if symmetry == "symmetric":
        for k in itertools.combinations_with_replacement(range(n), r):
            perms = set(itertools.permutations(k))
            out.append((k, {p: 1 for p in perms}))
    elif symmetry == "skew":
        for k in itertools.combinations(range(n), r):
            terms = {}
            for p in itertools.permutations(range(r)):
                terms[tuple(k[i] for i in p)] = _perm_sign(p)
            out.append((k, terms))
    else:
        raise GeometryError(f"unknown symmetry {symmetry!r}")
    return out


def _perm_sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _unknown_columns(frame, sig, symmetry, ansatz: AnsatzBasis):
    cols = []
    for key, terms in _slot_keys(frame, sig, symmetry):
        for phi in ansatz.functions:
            cols.append(Tensor(frame, sig, {k: phi * s for k, s in terms.items()}))
    return cols


def _residual_columns(cols: Sequence[Tensor], op: Callable[[Tensor], Sequence[Tensor]]):
    out = []
    for c in cols:
        res = op(c)
        d = {}
        for b, t in enumerate(res):
            for k, v in t.comps.items():
                d[(b,) + k] = v
        out.append(d)
    return out


def _assemble(cols: Sequence[Tensor], vec: Sequence[Expr]) -> Tensor:
    acc: dict = {}
    for c, v in zip(cols, vec):
        if v.is_zero():
            continue
        for k, e in c.comps.items():
            acc[k] = acc.get(k, ZERO) + v * e
    return Tensor(cols[0].frame, cols[0].sig, acc)


def _solve_fields(frame, sig, symmetry, ansatz: AnsatzBasis, op, parameters=None,
                  extra: Sequence[Sequence[Tensor]] = (), closure: bool = True):
    if closure:
        ansatz.require_closed()
    cols = _unknown_columns(frame, sig, symmetry, ansatz)
    res = _residual_columns(cols, op)
    for ex in extra:
        d = {}
        for b, t in enumerate(ex):
            for k, v in t.comps.items():
                d[(b,) + k] = v
        res.append(d)
    space = constant_relations(res, frame.coords, parameters)
    return cols, space


def _chart_metric(g: Metric) -> Metric:
    if g.frame.holonomic:
        return g
    return Metric(to_chart(g.value), g.signature)


def killing_vectors(g: Metric, ansatz: AnsatzBasis | None = None, parameters=None,
                    closure: bool = True) -> FieldSpace:
    """Killing vector fields of g whose components lie in the ansatz span."""
    g = _chart_metric(g)
    ansatz = ansatz or default_ansatz(g)
    frame = g.frame
    cols, space = _solve_fields(frame, ((T, UP),), None, ansatz,
                                lambda V: [lie_derivative(V, g.value)], parameters, closure=closure)
    fields = [_assemble(cols, v) for v in space.basis]
    return FieldSpace(fields, ansatz, space.branches)


def homothety_vectors(g: Metric, ansatz: AnsatzBasis | None = None, parameters=None,
                      closure: bool = True):
    """(homothetic field or None, Killing basis).

    The homothetic field is normalized to ``L_V g = 2 g`` and reduced against
    the Killing span.
    """
    g = _chart_metric(g)
    ansatz = ansatz or default_ansatz(g)
    frame = g.frame
    cols, space = _solve_fields(frame, ((T, UP),), None, ansatz,
                                lambda V: [lie_derivative(V, g.value)], parameters,
                                extra=[[g.value.scale(-1)]], closure=closure)
    n = len(cols)
    killing = [v for v in space.basis if v[n].is_zero()]
    homo = [v for v in space.basis if not v[n].is_zero()]
    kfields = [_assemble(cols, v[:n]) for v in killing]
    if not homo:
        return None, FieldSpace(kfields, ansatz)
    v = homo[0]
    scale = 2 / v[n]
    H = _assemble(cols, [e * scale for e in v[:n]])
    return H, FieldSpace(kfields, ansatz)


def _sym_residual(t: Tensor, g: Metric, kind: str) -> Tensor:
    D = covariant_derivative(t, christoffel(g))
    r = len(t.sig)
    if kind == "killing":
        return symmetrize(D, list(range(r + 1)), "symmetric")
    if kind == "killing-yano":
        return symmetrize(D, [0, r], "symmetric")
    raise GeometryError(f"unknown equation kind {kind!r}")


def killing_tensors(g: Metric, rank: int, ansatz: AnsatzBasis, parameters=None,
                    closure: bool = True) -> FieldSpace:
    """Symmetric covariant K with the totally symmetrized nabla K equal to zero."""
    g = _chart_metric(g)
    sig = ((T, DOWN),) * rank
    cols, space = _solve_fields(g.frame, sig, "symmetric" if rank > 1 else None, ansatz,
                                lambda K: [_sym_residual(K, g, "killing")], parameters, closure=closure)
    return FieldSpace([_assemble(cols, v) for v in space.basis], ansatz, space.branches)


def killing_yano(g: Metric, rank: int, ansatz: AnsatzBasis, parameters=None,
                 closure: bool = True) -> FieldSpace:
    """Skew covariant Y with nabla_(a Y_b)... = 0."""
    g = _chart_metric(g)
    sig = ((T, DOWN),) * rank
    cols, space = _solve_fields(g.frame, sig, "skew" if rank > 1 else None, ansatz,
                                lambda Y: [_sym_residual(Y, g, "killing-yano")], parameters,
                                closure=closure)
    return FieldSpace([_assemble(cols, v) for v in space.basis], ansatz, space.branches)


def check_invariant_equation(kind: str, g: Metric, candidate: Tensor) -> Tensor:
    """Residual of the defining equation for ``kind``; zero for a solution."""
    if kind in ("killing-vector", "homothety"):
        if candidate.sig != ((T, UP),):
            raise GeometryError(f"{kind} candidate must be a vector field")
        L = lie_derivative(candidate, g.value)
        if kind == "killing-vector":
            return L
        # L_V g = c g with c constant: the residual is L - c g for the c read off
        # a nonzero component, plus dc if that ratio is not constant
        k = next(iter(g.value.comps))
        c = L[k] / g.value[k]
        res = L - g.value.scale(c)
        if not c.variables().isdisjoint(g.frame.coords):
            raise GeometryError("homothety factor is not constant")
        return res
    if any(s != (T, DOWN) for s in candidate.sig):
        raise GeometryError(f"{kind} candidate must be a covariant tensor")
    if kind == "killing":
        r = len(candidate.sig)
        if r > 1 and symmetrize(candidate, list(range(r))) != candidate:
            raise GeometryError("Killing tensor candidate is not symmetric")
    elif kind == "killing-yano":
        r = len(candidate.sig)
        if r > 1 and symmetrize(candidate, list(range(r)), "skew") != candidate:
            raise GeometryError("Killing-Yano candidate is not skew")
    else:
        raise GeometryError(f"unknown equation kind {kind!r}")
    return _sym_residual(candidate, g, kind)


def killing_yano_square(Y: Tensor, g: Metric) -> Tensor:
    """K_ab = Y_a^c Y_cb."""
    Ym = raise_lower(Y, g, [1])
    return contract(tensor_product(Ym, Y), [(1, 2)])


# --------------------------------------------------------------------------
# symmetric products and decompositions
# --------------------------------------------------------------------------

def symmetrized_product(factors: Sequence[Tensor]) -> Tensor:
    """Average of the tensor products over all orderings of ``factors``:
    ``a (x) a`` for a repeated factor and ``(a (x) b + b (x) a)/2`` otherwise."""
    t = factors[0]
    for f in factors[1:]:
        t = tensor_product(t, f)
    return symmetrize(t, list(range(len(t.sig))), "symmetric")


def symmetric_products(basis: Sequence[Tensor], rank: int) -> list[Tensor]:
    """All symmetric products of ``rank`` elements; C(n+rank-1, rank) of them."""
    if not basis:
        return []
    frame = basis[0].frame
    if any(b.frame is not frame for b in basis):
        raise GeometryError("symmetric_products needs a common frame")
    return [symmetrized_product([basis[i] for i in combo])
            for combo in itertools.combinations_with_replacement(range(len(basis)), rank)]


def _flat(t: Tensor):
    return dict(t.comps)


def get_components(targets, span: Sequence[Tensor], mode: str = "coefficients",
                   over: str = "functions"):
    """Expand targets over ``span``.

    ``over="functions"`` solves pointwise (coefficients may depend on the
    coordinates); ``over="constants"`` requires constant coefficients.  In
    ``mode="membership"`` the return value is a single boolean; otherwise a
    list of coefficient lists (``None`` for a target outside the span).
    """
    single = isinstance(targets, Tensor)
    tlist = [targets] if single else list(targets)
    if not span:
        res = [None if not t.is_zero() else [] for t in tlist]
        return all(r is not None for r in res) if mode == "membership" else (res[0] if single else res)
    frame = span[0].frame
    for t in list(span) + tlist:
        if t.sig != span[0].sig:
            raise GeometryError("get_components needs equal signatures")
    out = []
    m = len(span)
    for t in tlist:
        cols = [_flat(s) for s in span] + [_flat(t)]
        if over == "constants":
            space = constant_relations(cols, frame.coords)
        elif over == "functions":
            keys = sorted({k for c in cols for k in c})
            rows = [{u: c[k] for u, c in enumerate(cols) if k in c} for k in keys]
            space = nullspace(rows, [f"c{u}" for u in range(m + 1)], m + 1)
        else:
            raise GeometryError(f"unknown coefficient field {over!r}")
        sol = None
        for v in space.basis:
            if not v[m].is_zero():
                inv = -v[m].inverse()
                sol = [e * inv for e in v[:m]]
                break
        out.append(sol)
    if mode == "membership":
        return all(s is not None for s in out)
    return out[0] if single else out


# --------------------------------------------------------------------------
# group-invariant fields and normalizers
# --------------------------------------------------------------------------

def invariant_fields(generators: Sequence[Tensor], shape, ansatz: AnsatzBasis,
                     symmetry: str | None = None, parameters=None, closure: bool = True) -> FieldSpace:
    """Fields T of the given shape with L_X T = 0 for each generator X.

    ``shape`` is a slot signature, or a list of tensors whose span (with
    ansatz-function coefficients) is searched.
    """
    frame = ansatz_frame(generators, shape)
    op = lambda t: [lie_derivative(X, t) for X in generators]  # noqa: E731
    if closure:
        ansatz.require_closed()
    if isinstance(shape, (list, tuple)) and shape and isinstance(shape[0], Tensor):
        cols = [b.scale(phi) for b in shape for phi in ansatz.functions]
        res = _residual_columns(cols, op)
        space = constant_relations(res, frame.coords, parameters)
    else:
        sig = tuple(shape)
        if not sig:
            cols = [Tensor.scalar(frame, phi) for phi in ansatz.functions]
            res = [{(b,): lie_derivative_scalar(X, c.value()) for b, X in enumerate(generators)}
                   for c in cols]
            space = constant_relations(res, frame.coords, parameters)
        else:
            cols, space = _solve_fields(frame, sig, symmetry, ansatz, op, parameters, closure=False)
    return FieldSpace([_assemble(cols, v) for v in space.basis], ansatz, space.branches)


def ansatz_frame(generators, shape):
    if generators:
        return generators[0].frame
    if isinstance(shape, (list, tuple)) and shape and isinstance(shape[0], Tensor):
        return shape[0].frame
    raise GeometryError("cannot infer the frame: give generators or tensor shape")


def lie_derivative_scalar(X: Tensor, f: Expr) -> Expr:
    fr = X.frame
    out = ZERO
    for i, d in enumerate(fr.grad(f)):
        c = X[i]
        if not c.is_zero() and not d.is_zero():
            out = out + c * d
    return out


def pointwise_generators(space: Sequence[Tensor]) -> list[Tensor]:
    """A maximal subset of fields independent over functions, preferring the
    first listed (generators of the solution module over invariant functions)."""
    kept: list[Tensor] = []
    for t in space:
        if t.is_zero():
            continue
        if not kept or get_components(t, kept, over="functions") is None:
            kept.append(t)
    return kept


def infinitesimal_normalizer(generators: Sequence[Tensor], ansatz: AnsatzBasis,
                             parameters=None, closure: bool = True) -> FieldSpace:
    """Vector fields Z in the ansatz with [Z, X] in span(generators) over constants,
    modulo the generators themselves."""
    if not generators:
        raise GeometryError("normalizer needs at least one generator")
    frame = generators[0].frame
    m = len(generators)
    op = lambda Z: [commutator(Z, X) for X in generators]  # noqa: E731
    extra = []
    for i in range(m):
        for j in range(m):
            block = [Tensor(frame, ((T, UP),)) for _ in range(m)]
            block[i] = generators[j].scale(-1)
            extra.append(block)
    cols, space = _solve_fields(frame, ((T, UP),), None, ansatz, op, parameters, extra=extra,
                                closure=closure)
    n = len(cols)
    found = [_assemble(cols, v[:n]) for v in space.basis]
    kept: list[Tensor] = []
    for Z in found:
        if Z.is_zero():
            continue
        if not get_components(Z, list(generators) + kept, mode="membership", over="constants"):
            kept.append(Z)
    return FieldSpace(kept, ansatz)


# --------------------------------------------------------------------------
# flows and pullbacks
# --------------------------------------------------------------------------

@dataclass
class CoordinateMap:
    """x^i -> images[i]; a flow carries its parameter."""

    frame: object
    images: list[Expr]
    parameter: Atom | None = None

    def __str__(self):
        return "[" + ", ".join(f"{x} = {e}" for x, e in zip(self.frame.coords, self.images)) + "]"

    def bindings(self) -> dict[Atom, Expr]:
        return dict(zip(self.frame.coords, self.images))

    def compose(self, other: "CoordinateMap") -> "CoordinateMap":
        """(self o other)(x) = self(other(x))."""
        b = other.bindings()
        return CoordinateMap(self.frame, [e.subs(b) for e in self.images])

    def at(self, value) -> "CoordinateMap":
        return CoordinateMap(self.frame, [e.subs({self.parameter: value}) for e in self.images])


class UnsupportedFlowError(UnsupportedError):
    pass


def flow(X: Tensor, parameter: str | Atom = "s") -> CoordinateMap:
    """Closed-form flow of a triangular-integrable vector field.

    Supported: an ordering of the coordinates in which each component reads
    ``alpha + beta x_i`` where beta depends only on coordinates fixed by the
    flow and alpha either depends only on those (any beta), or (beta = 0)
    becomes a polynomial in the flow parameter once earlier coordinates are
    substituted.
    """
    X = to_chart(X)
    frame = X.frame
    s = parameter if isinstance(parameter, Atom) else core.parameter(parameter)
    coords = frame.coords
    n = len(coords)
    comps = [X[i] for i in range(n)]
    fixed = {coords[i] for i in range(n) if comps[i].is_zero()}
    solved: dict[Atom, Expr] = {x: x.expr for x in fixed}
    pending = [i for i in range(n) if coords[i] not in fixed]
    while pending:
        progress = False
        for i in list(pending):
            x = coords[i]
            c = comps[i]
            deps = c.variables() & set(coords)
            if not deps <= set(solved) | {x}:
                continue
            beta = c.diff(x)
            if beta.depends_on(x):
                raise UnsupportedFlowError(f"component {c} is not affine in {x}")
            alpha = c - beta * x.expr
            if not (beta.variables() & set(coords)) <= fixed:
                raise UnsupportedFlowError(f"rate {beta} varies along the flow")
            if beta.is_zero():
                a_s = alpha.subs(solved)
                solved[x] = x.expr + _integrate_in(a_s, s)
            else:
                if not (alpha.variables() & set(coords)) <= fixed:
                    raise UnsupportedFlowError(f"inhomogeneous term {alpha} varies along the flow")
                e = core.exp(beta * s.expr)
                solved[x] = e * x.expr + alpha / beta * (e - 1)
            pending.remove(i)
            progress = True
        if not progress:
            raise UnsupportedFlowError("vector field is not triangular-integrable")
    return CoordinateMap(frame, [solved[x] for x in coords], s)


def _integrate_in(e: Expr, s: Atom) -> Expr:
    """Integral from 0 of a polynomial in s with s-free coefficients."""
    if not e.depends_on(s):
        return e * s.expr
    coeffs = []
    rest = e
    k = 0
    while not rest.is_zero():
        c = rest.subs({s: ZERO})
        coeffs.append(c * Fraction(1, math.factorial(k)))
        rest = rest.diff(s)
        k += 1
        if k > 32:
            raise UnsupportedFlowError(f"{e} is not polynomial in {s}")
    out = ZERO
    for k, c in enumerate(coeffs):
        out = out + c * s.expr ** (k + 1) * Fraction(1, k + 1)
    return out


def pullback(phi: CoordinateMap | Sequence[Expr] | Mapping, t: Tensor) -> Tensor:
    """phi^* t for a covariant tensor t on the chart of phi."""
    t = to_chart(t)
    frame = t.frame
    if isinstance(phi, CoordinateMap):
        images = phi.images
    elif isinstance(phi, Mapping):
        images = [as_expr(phi.get(x, phi.get(x.name, x.expr))) for x in frame.coords]
    else:
        images = [as_expr(e) for e in phi]
    if any(s != (T, DOWN) for s in t.sig):
        raise GeometryError("pullback acts on covariant tensors")
    n = frame.dim
    bind = dict(zip(frame.coords, images))
    J = [[images[c].diff(frame.coords[a]) for c in range(n)] for a in range(n)]  # J[a][c] = d phi^c / dx^a
    out = {}
    r = len(t.sig)
    for k, v in t.comps.items():
        vp = v.subs(bind)
        choices = [[(a, J[a][k[p]]) for a in range(n) if not J[a][k[p]].is_zero()] for p in range(r)]
        for combo in itertools.product(*choices):
            w = vp
            for _, j in combo:
                w = w * j
            key = tuple(a for a, _ in combo)
            out[key] = out.get(key, ZERO) + w
    return Tensor(frame, t.sig, out)


# --------------------------------------------------------------------------
# isometry dimension from curvature at one point (Killing transport)
# --------------------------------------------------------------------------

@dataclass
class KillingData:
    """Basis of admissible Killing data (v^a, lam_c^a = nabla_c V^a) at a point."""

    dimension: int
    vectors: list[list[Expr]]       # v^a for each basis element
    lambdas: list[list[list[Expr]]]  # lam[c][a]
    brackets: dict                  # (i, j) -> list of coefficients in the basis
    stable: bool
    depth: int
    history: list[int] = field(default_factory=list)


def _lower_all(R: Tensor, g: Metric) -> Tensor:
    return raise_lower(R, g, [0])


def _eval_tensor(t: Tensor, point: Mapping) -> dict:
    return {k: v.subs(point) for k, v in t.comps.items()}


def isometry_dimension_at_point(g: Metric, point: Mapping, depth: int = 3) -> KillingData:
    """Dimension of the Killing algebra from L_V (nabla^k Riem) = 0 at a point.

    The unknowns are Killing data ``(v^a, lam_ab)`` with lam skew.  The
    constraint set grows with ``k`` until its solution dimension repeats at two
    consecutive orders; ``stable`` is False when ``depth`` ran out first (the
    dimension is then an upper bound).
    """
    g = _chart_metric(g)
    frame = g.frame
    n = frame.dim
    pt = {(frame.coords[frame.index_of(k)] if isinstance(k, str) else k): as_expr(v)
          for k, v in point.items()}
    G = [[e.subs(pt) for e in row] for row in g.matrix]
    Gi = [[e.subs(pt) for e in row] for row in g.inv_matrix]
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    N = n + len(pairs)

    def lam_of(x):  # mixed lam_c^a from skew lam_cb
        low = [[ZERO] * n for _ in range(n)]
        for idx, (a, b) in enumerate(pairs):
            w = x[n + idx]
            if not w.is_zero():
                low[a][b] = low[a][b] + w
                low[b][a] = low[b][a] - w
        return [[sum((low[c][b] * Gi[b][a] for b in range(n) if not low[c][b].is_zero()), ZERO)
                 for a in range(n)] for c in range(n)]

    unit = [[ONE if i == j else ZERO for j in range(N)] for i in range(N)]
    lam_unit = [lam_of(u) for u in unit]
    conn = christoffel(g)
    Rl = _lower_all(riemann(g), g)
    cur = Rl
    rows: list[dict] = []
    dims = []
    stable = False
    last = None
    for k in range(depth + 1):
        nxt = covariant_derivative(cur, conn)
        Tp = _eval_tensor(cur, pt)
        DTp = _eval_tensor(nxt, pt)
        r = len(cur.sig)
        keys = set(Tp)
        for key in Tp:
            for p in range(r):
                for a in range(n):
                    keys.add(key[:p] + (a,) + key[p + 1:])
        keys |= {kk[:-1] for kk in DTp}
        for key in keys:
            row = {}
            for u in range(N):
                val = ZERO
                if u < n:
                    d = DTp.get(key + (u,))
                    if d is not None:
                        val = val + d
                else:
                    lam = lam_unit[u]
                    for p in range(r):
                        ap = key[p]
                        for e in range(n):
                            m = lam[ap][e]
                            if m.is_zero():
                                continue
                            tv = Tp.get(key[:p] + (e,) + key[p + 1:])
                            if tv is not None:
                                val = val + tv * m
                if not val.is_zero():
                    row[u] = val
            if row:
                rows.append(row)
        space = nullspace(rows, [f"k{u}" for u in range(N)], N)
        dims.append(space.dimension)
        if space.dimension == 0 or (len(dims) >= 2 and dims[-1] == dims[-2]):
            stable = True
            last = space
            break
        last = space
        cur = nxt
    basis = last.basis
    vecs = [v[:n] for v in basis]
    lams = [lam_of(v) for v in basis]
    Rp = _eval_tensor(riemann(g), pt)
    brackets = _transport_brackets(vecs, lams, Rp, basis, n, pairs, G)
    return KillingData(len(basis), vecs, lams, brackets, stable, len(dims) - 1, dims)


def _transport_brackets(vecs, lams, Rp, basis, n, pairs, G):
    """Brackets of Killing data: [V,W]^a = v_V^b lam_W{}_b^a - (V<->W),
    nabla_c [V,W]^a = lam_V{}_c^b lam_W{}_b^a + R^a_bcd v_V^b v_W^d - (V<->W)."""
    m = len(basis)
    N = n + len(pairs)

    def data(i, j):
        vV, vW, lV, lW = vecs[i], vecs[j], lams[i], lams[j]
        v = [sum((vV[b] * lW[b][a] - vW[b] * lV[b][a] for b in range(n)), ZERO) for a in range(n)]
        lam = [[ZERO] * n for _ in range(n)]
        for c in range(n):
            for a in range(n):
                s = ZERO
                for b in range(n):
                    s = s + lV[c][b] * lW[b][a] - lW[c][b] * lV[b][a]
                for (aa, b, cc, d), rv in Rp.items():
                    if aa == a and cc == c:
                        s = s + rv * (vV[b] * vW[d] - vW[b] * vV[d])
                lam[c][a] = s
        low = [[sum((lam[c][a] * G[a][b] for a in range(n)), ZERO) for b in range(n)] for c in range(n)]
        return v + [low[a][b] for a, b in pairs]

    out = {}
    for i in range(m):
        for j in range(i + 1, m):
            target = data(i, j)
            cols = [[e for e in b] for b in basis] + [target]
            rows = [{u: cols[u][k] for u in range(m + 1) if not cols[u][k].is_zero()} for k in range(N)]
            sp = nullspace(rows, [f"b{u}" for u in range(m + 1)], m + 1)
            coeffs = None
            for v in sp.basis:
                if not v[m].is_zero():
                    inv = -v[m].inverse()
                    coeffs = [e * inv for e in v[:m]]
                    break
            if coeffs is None:
                raise GeometryError("Killing data bracket left the solution space")
            out[(i, j)] = coeffs
    return out
