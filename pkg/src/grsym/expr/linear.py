"""Exact null spaces of linear systems over the expression field."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import flint

from . import core
from .core import Atom, Expr, NonlinearError, ONE, ZERO


@dataclass
class LinearSolutionSpace:
    """Null-space basis of a homogeneous linear system.

    ``branches`` holds the special cases found while pivoting on parameter
    polynomials: pairs ``(condition, space)`` where ``condition`` is a
    polynomial that vanishes on that branch.  The space itself is the generic
    branch where every recorded condition is nonzero.
    """

    unknowns: list[str]
    basis: list[list[Expr]]
    branch_conditions: list[Expr] = field(default_factory=list)
    branches: list[tuple[Expr, "LinearSolutionSpace"]] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def free_parameter_count(self) -> int:
        return len(self.basis)

    def __len__(self):
        return len(self.basis)


# --------------------------------------------------------------------------
# coefficient extraction
# --------------------------------------------------------------------------

def coefficient_matrix(system: Sequence[Expr], unknowns: Sequence[Atom]) -> list[list[Expr]]:
    """Rows of coefficients of a homogeneous system linear in ``unknowns``."""
    idx = {u.index: j for j, u in enumerate(unknowns)}
    rows = []
    for eq in system:
        eq = core.as_expr(eq)
        if eq.is_zero():
            continue
        num, den = eq.num, eq.den
        dd = den.degrees()
        if any(i < len(dd) and dd[i] > 0 for i in idx):
            raise NonlinearError(f"unknown appears in a denominator: {eq}")
        buckets: dict[int, dict] = {}
        for exps, c in num.terms():
            hit = -1
            for i, j in idx.items():
                if i < len(exps) and exps[i]:
                    if hit >= 0 or exps[i] > 1:
                        raise NonlinearError(f"nonlinear occurrence of an unknown in {eq}")
                    hit = j
            if hit < 0:
                raise NonlinearError(f"inhomogeneous term in {eq}")
            e2 = list(exps)
            e2[unknowns[hit].index] = 0
            buckets.setdefault(hit, {})[tuple(e2)] = c
        row = [ZERO] * len(unknowns)
        for j, terms in buckets.items():
            p = core._ctx.from_dict(terms)
            row[j] = core._finish(p, den)
        rows.append(row)
    return rows


def solve_linear(system: Sequence[Expr], unknowns: Sequence[Atom],
                 parameters: Sequence[Atom] | None = None) -> LinearSolutionSpace:
    """Null space of ``system`` (each entry an expression equal to zero)."""
    rows = coefficient_matrix(system, unknowns)
    return nullspace(rows, [str(u) for u in unknowns], len(unknowns), parameters)


# --------------------------------------------------------------------------
# elimination
# --------------------------------------------------------------------------

def _is_rational_matrix(rows) -> bool:
    return all(e.is_constant() for r in rows for e in (r.values() if isinstance(r, dict) else r))


def _rational_nullspace(rows: list[dict], n: int) -> list[list[Expr]]:
    if not rows:
        return [[ONE if k == j else ZERO for k in range(n)] for j in range(n)]
    M = flint.fmpq_mat(len(rows), n)
    for i, r in enumerate(rows):
        for j, e in r.items():
            M[i, j] = flint.fmpq(e.as_fraction().numerator, e.as_fraction().denominator)
    R, rank = M.rref()
    pivots = []
    for i in range(rank):
        for j in range(n):
            if R[i, j] != 0:
                pivots.append(j)
                break
    pset = set(pivots)
    basis = []
    for f in range(n):
        if f in pset:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for i, p in enumerate(pivots):
            c = R[i, f]
            if c != 0:
                v[p] = core.as_expr(-c)
        basis.append(v)
    return basis


def _to_sparse(rows) -> list[dict]:
    out = []
    seen = set()
    for r in rows:
        d = {j: e for j, e in enumerate(r) if not e.is_zero()} if not isinstance(r, dict) else \
            {j: e for j, e in r.items() if not e.is_zero()}
        if not d:
            continue
        # normalize for duplicate detection
        j0 = min(d)
        lead = d[j0]
        key = tuple(sorted((j, (e / lead).key()) for j, e in d.items()))
        if key in seen:
            continue
        seen.add(key)
        out.append(d)
    return out


def _param_only(e: Expr, params: set[Atom]) -> bool:
    ats = e.atoms()
    return bool(ats) and ats <= params


def _pivot_score(e: Expr) -> tuple:
    if e.is_constant():
        return (0, 0)
    return (1, len(str(e)))


def _linear_param_solution(factor: Expr, params: list[Atom]):
    for p in params:
        if not factor.depends_on(p):
            continue
        d = factor.diff(p)
        if d.depends_on(p):
            continue
        rest = factor.subs({p: ZERO})
        return p, -rest / d
    return None


def nullspace(rows, labels: list[str], n: int | None = None,
              parameters: Sequence[Atom] | None = None, _depth: int = 0) -> LinearSolutionSpace:
    """Basis of the right null space of a matrix given as rows (lists or
    sparse dicts) of Exprs."""
    if n is None:
        n = len(labels)
    sparse = _to_sparse(rows)
    if _is_rational_matrix(sparse):
        return LinearSolutionSpace(list(labels), _rational_nullspace(sparse, n))
    params = set(parameters or ())
    branches: list[tuple[Expr, LinearSolutionSpace]] = []
    conditions: list[Expr] = []
    work = sparse
    pivots: list[tuple[int, dict]] = []
    used_cols: set[int] = set()
    while work:
        # choose the pivot over all remaining rows and columns
        best = None
        for ri, r in enumerate(work):
            for j, e in r.items():
                s = _pivot_score(e)
                if best is None or s < best[0]:
                    best = (s, ri, j)
                    if s == (0, 0):
                        break
            if best[0] == (0, 0):
                break
        _, ri, j = best
        prow = work.pop(ri)
        pv = prow[j]
        if params and not pv.is_constant() and _param_only(pv.numerator(), params) and _depth < 8:
            plist = sorted(params, key=lambda a: a.sort_key)
            _, factors = pv.num.factor()
            for f, _k in factors:
                fe = core._finish(f, core._const_poly(1))
                sol = _linear_param_solution(fe, plist)
                if sol is None:
                    continue
                p, val = sol
                sub_rows = [{c: e.subs({p: val}) for c, e in r.items()} for r in sparse]
                space = nullspace(sub_rows, labels, n, [q for q in plist if q is not p], _depth + 1)
                space.basis = [[e.subs({p: val}) for e in v] for v in space.basis]
                branches.append((fe, space))
                conditions.append(fe)
        inv = pv.inverse()
        prow = {c: (e * inv if c != j else ONE) for c, e in prow.items()}
        # eliminate column j from remaining rows and from earlier pivot rows
        new_work = []
        for r in work:
            c = r.get(j)
            if c is None:
                new_work.append(r)
                continue
            r2 = dict(r)
            for k, e in prow.items():
                v = r2.get(k, ZERO) - c * e
                if v.is_zero():
                    r2.pop(k, None)
                else:
                    r2[k] = v
            if r2:
                new_work.append(r2)
        work = new_work
        for idx, (pj, r) in enumerate(pivots):
            c = r.get(j)
            if c is None:
                continue
            r2 = dict(r)
            for k, e in prow.items():
                v = r2.get(k, ZERO) - c * e
                if v.is_zero():
                    r2.pop(k, None)
                else:
                    r2[k] = v
            pivots[idx] = (pj, r2)
        pivots.append((j, prow))
        used_cols.add(j)
    basis = []
    for f in range(n):
        if f in used_cols:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for pj, r in pivots:
            c = r.get(f)
            if c is not None:
                v[pj] = -c
        basis.append(v)
    return LinearSolutionSpace(list(labels), basis, conditions, branches)


def rank(rows, n: int) -> int:
    return n - len(nullspace(rows, [str(i) for i in range(n)], n).basis)
