"""Charts, frames, tensors and pointwise tensor algebra.

Tensors store components on a :class:`Frame` keyed by multi-index; zero
components are omitted, every other component is stored explicitly (no
implied symmetry).  Index slots are ``(space, variance)`` pairs where space is
``"t"`` (tangent), ``"s"`` (spinor) or ``"c"`` (conjugate spinor) and variance
is ``"u"`` or ``"d"``.
"""

from __future__ import annotations

import copy
import itertools
import math
import random
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .expr import core
from .expr.core import Atom, Expr, ExprError, ONE, ZERO, as_expr

T, S, C = "t", "s", "c"
UP, DOWN = "u", "d"
MAX_DIM = 6
MAX_RANK = 8


class GeometryError(ExprError):
    pass


class SignatureMismatch(GeometryError):
    pass


# --------------------------------------------------------------------------
# small exact matrix helpers
# --------------------------------------------------------------------------

def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            s = ZERO
            for k in range(m):
                a, b = A[i][k], B[k][j]
                if not a.is_zero() and not b.is_zero():
                    s = s + a * b
            row.append(s)
        out.append(row)
    return out


def mat_inverse(A):
    """Exact inverse by Gauss-Jordan; raises GeometryError when singular."""
    n = len(A)
    M = [list(map(as_expr, row)) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            e = M[r][col]
            if not e.is_zero() and (piv is None or (e.is_constant() and not M[piv][col].is_constant())):
                piv = r
        if piv is None:
            raise GeometryError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [e * inv for e in M[col]]
        for r in range(n):
            if r != col and not M[r][col].is_zero():
                c = M[r][col]
                M[r] = [a - c * b if not b.is_zero() else a for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def mat_det(A) -> Expr:
    n = len(A)
    M = [list(map(as_expr, row)) for row in A]
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if not M[r][col].is_zero()), None)
        if piv is None:
            return ZERO
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        p = M[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            if not M[r][col].is_zero():
                c = M[r][col] * inv
                M[r] = [a - c * b for a, b in zip(M[r], M[col])]
    return det


def transpose(A):
    return [list(r) for r in zip(*A)]


# --------------------------------------------------------------------------
# numeric sampling (signature detection, sign choices)
# --------------------------------------------------------------------------

def sample_point(exprs: Iterable[Expr], seed: int = 7, lo: float = 0.31, hi: float = 0.93) -> dict:
    """Deterministic pseudo-random values for every leaf atom (coordinates,
    parameters, opaque functions) appearing in ``exprs``."""
    rng = random.Random(seed)
    values = {}
    pending = list(core.atoms_of(exprs))
    seen = set()
    while pending:
        a = pending.pop()
        if a in seen:
            continue
        seen.add(a)
        if a.kind in (core.COORD, core.PARAM, core.FUNC):
            # stable per atom so repeated calls agree
            r = random.Random(f"{seed}:{a.sort_key}")
            values[a] = lo + (hi - lo) * r.random()
        elif a.arg is not None:
            pending.extend(a.arg.atoms())
    del rng
    return values


def numeric_sign(e: Expr, seed: int = 7) -> int:
    e = as_expr(e)
    if e.is_zero():
        return 0
    if e.is_constant():
        return 1 if e.as_fraction() > 0 else -1
    v = e.evalf(sample_point([e], seed)).real
    return 1 if v > 0 else -1


def _inertia(M: list[list[complex]]) -> list[int]:
    """Signs of a real symmetric matrix's eigenvalues via symmetric elimination."""
    n = len(M)
    A = [[M[i][j].real for j in range(n)] for i in range(n)]
    signs = []
    for _ in range(n):
        k = max(range(len(A)), key=lambda i: abs(A[i][i]))
        if abs(A[k][k]) < 1e-12:
            # rotate an off-diagonal pair into the diagonal
            best = max(((i, j) for i in range(len(A)) for j in range(len(A)) if i != j),
                       key=lambda ij: abs(A[ij[0]][ij[1]]), default=None)
            if best is None or abs(A[best[0]][best[1]]) < 1e-12:
                raise GeometryError("degenerate metric")
            i, j = best
            for r in range(len(A)):
                A[r][i] += A[r][j]
            for c in range(len(A)):
                A[i][c] += A[j][c]
            k = i
        p = A[k][k]
        signs.append(1 if p > 0 else -1)
        rest = [r for r in range(len(A)) if r != k]
        A = [[A[r][c] - A[r][k] * A[k][c] / p for c in rest] for r in rest]
    return signs


# --------------------------------------------------------------------------
# frames
# --------------------------------------------------------------------------

class Frame:
    """A chart or an anholonomic frame over a chart.

    ``vectors[i][mu]`` holds the coordinate components of ``E_i``;
    ``coframe[i][mu]`` those of the dual 1-form ``theta^i``.  ``structure``
    maps ``(k, i, j)`` to ``C^k_ij`` with ``[E_i, E_j] = C^k_ij E_k``.
    """

    def __init__(self, name: str, coords: Sequence[Atom], labels: Sequence[str],
                 coframe_labels: Sequence[str], vectors=None, coframe=None,
                 structure: Mapping | None = None, spinor_labels: Sequence[str] | None = None,
                 pairing: Mapping | None = None, chart: "Frame | None" = None):
        self.name = name
        self.coords = list(coords)
        self.labels = list(labels)
        self.coframe_labels = list(coframe_labels)
        self.dim = len(self.coords)
        self.holonomic = vectors is None
        self.chart = chart or self
        n = self.dim
        if self.holonomic:
            ident = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
            self.vectors, self.coframe = ident, ident
        else:
            self.vectors = [list(map(as_expr, r)) for r in vectors]
            self.coframe = coframe if coframe is not None else transpose(mat_inverse(self.vectors))
        self.structure: dict[tuple[int, int, int], Expr] = dict(structure or {})
        self.spinor_labels = list(spinor_labels) if spinor_labels else None
        self.pairing: dict[Atom, Atom] = dict(pairing or {})

    def __repr__(self):
        return f"Frame({self.name}, dim={self.dim})"

    # -- derivations ----------------------------------------------------------
    def apply(self, i: int, f: Expr) -> Expr:
        """E_i(f)."""
        if self.holonomic:
            return f.diff(self.coords[i])
        out = ZERO
        for mu, c in enumerate(self.vectors[i]):
            if not c.is_zero():
                d = f.diff(self.coords[mu])
                if not d.is_zero():
                    out = out + c * d
        return out

    def grad(self, f: Expr) -> list[Expr]:
        if self.holonomic:
            return [f.diff(x) for x in self.coords]
        partials = [f.diff(x) for x in self.coords]
        return [sum((c * p for c, p in zip(row, partials) if not c.is_zero() and not p.is_zero()), ZERO)
                for row in self.vectors]

    def C(self, k: int, i: int, j: int) -> Expr:
        return self.structure.get((k, i, j), ZERO)

    # -- basis objects ----------------------------------------------------------
    def vector(self, i: int) -> "Tensor":
        return Tensor(self, ((T, UP),), {(i,): ONE})

    def form(self, i: int) -> "Tensor":
        return Tensor(self, ((T, DOWN),), {(i,): ONE})

    def index_of(self, coord_name: str) -> int:
        for i, x in enumerate(self.coords):
            if x.name == coord_name:
                return i
        raise KeyError(coord_name)

    def space_dim(self, space: str) -> int:
        if space == T:
            return self.dim
        if self.spinor_labels is None:
            raise GeometryError(f"frame {self.name} has no spinor spaces")
        return 2

    def slot_labels(self, slot) -> list[str]:
        space, var = slot
        if space == T:
            return self.labels if var == UP else self.coframe_labels
        sl = self.spinor_labels or ["z1", "z2", "w1", "w2"]
        names = sl[:2] if space == S else sl[2:]
        return [("D_" + s) if var == UP else ("d" + s) for s in names]

    def with_spinors(self, labels: Sequence[str]) -> "Frame":
        """A copy of this frame carrying spinor spaces; tensors must be rebuilt on it."""
        if len(labels) != 4:
            raise GeometryError("spinor labels must name z1 z2 w1 w2")
        out = copy.copy(self)
        out.spinor_labels = list(labels)
        if self.chart is self:
            out.chart = out
        return out


def dgsetup(coords: Sequence[str | Atom], name: str = "M", spinor_labels: Sequence[str] | None = None,
            pairing: Mapping[str, str] | None = None) -> Frame:
    """Holonomic frame with basis ``D_x`` and coframe ``dx`` for each coordinate."""
    names = [c.name if isinstance(c, Atom) else c for c in coords]
    if len(set(names)) != len(names):
        raise GeometryError(f"duplicate coordinate name in {names}")
    if not names or len(names) > MAX_DIM:
        raise GeometryError(f"dimension must be between 1 and {MAX_DIM}")
    pairing = dict(pairing or {})
    paired = set(pairing) | set(pairing.values())
    atoms = [c if isinstance(c, Atom) else core.coordinate(c, real=c not in paired) for c in coords]
    by_name = {a.name: a for a in atoms}
    pair_atoms = {by_name[a]: by_name[b] for a, b in pairing.items()}
    pair_atoms.update({b: a for a, b in pair_atoms.items()})
    if spinor_labels is not None and len(spinor_labels) != 4:
        raise GeometryError("spinor labels must name z1 z2 w1 w2")
    return Frame(name, atoms, [f"D_{n}" for n in names], [f"d{n}" for n in names],
                 spinor_labels=spinor_labels, pairing=pair_atoms)


# --------------------------------------------------------------------------
# tensors
# --------------------------------------------------------------------------

class Tensor:
    """Immutable tensor field with explicit components."""

    __slots__ = ("frame", "sig", "comps")

    def __init__(self, frame: Frame, sig: Sequence[tuple[str, str]], comps: Mapping | None = None):
        self.frame = frame
        self.sig = tuple(tuple(s) for s in sig)
        if len(self.sig) > MAX_RANK:
            raise GeometryError(f"rank exceeds {MAX_RANK}")
        self.comps: dict[tuple, Expr] = {}
        if comps:
            for k, v in comps.items():
                v = as_expr(v)
                if not v.is_zero():
                    self.comps[tuple(k)] = v

    @classmethod
    def scalar(cls, frame: Frame, value) -> "Tensor":
        return cls(frame, (), {(): as_expr(value)})

    @property
    def rank(self) -> int:
        return len(self.sig)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.frame.space_dim(s) for s, _ in self.sig)

    def indices(self):
        return itertools.product(*[range(d) for d in self.dims])

    def __getitem__(self, idx) -> Expr:
        if not isinstance(idx, tuple):
            idx = (idx,)
        return self.comps.get(idx, ZERO)

    def value(self) -> Expr:
        """Scalar value of a rank-0 tensor."""
        if self.sig:
            raise GeometryError("not a scalar")
        return self.comps.get((), ZERO)

    def is_zero(self) -> bool:
        return not self.comps

    def _check(self, other: "Tensor"):
        if not isinstance(other, Tensor):
            raise TypeError("tensor arithmetic needs tensors")
        if other.frame is not self.frame:
            raise SignatureMismatch("tensors live on different frames")
        if other.sig != self.sig:
            raise SignatureMismatch(f"index signatures differ: {self.sig} vs {other.sig}")

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            s = out.get(k, ZERO) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return Tensor(self.frame, self.sig, out)

    def __radd__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return Tensor(self.frame, self.sig, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, e) -> "Tensor":
        e = as_expr(e)
        if e.is_zero():
            return Tensor(self.frame, self.sig)
        return Tensor(self.frame, self.sig, {k: e * v for k, v in self.comps.items()})

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return tensor_product(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        return self.scale(as_expr(other).inverse())

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.frame is other.frame and self.sig == other.sig and self.comps == other.comps

    __hash__ = None

    def map(self, fn: Callable[[Expr], Expr]) -> "Tensor":
        return Tensor(self.frame, self.sig, {k: fn(v) for k, v in self.comps.items()})

    def subs(self, bindings) -> "Tensor":
        return self.map(lambda e: e.subs(bindings))

    def conjugate(self) -> "Tensor":
        """Complex conjugate; spinor and conjugate-spinor slots trade places."""
        swap = {T: T, S: C, C: S}
        sig = tuple((swap[s], v) for s, v in self.sig)
        return Tensor(self.frame, sig, {k: core.conjugate(v, self.frame.pairing) for k, v in self.comps.items()})

    def permute(self, perm: Sequence[int]) -> "Tensor":
        """Reorder slots: new slot i is old slot perm[i]."""
        sig = tuple(self.sig[p] for p in perm)
        return Tensor(self.frame, sig, {tuple(k[p] for p in perm): v for k, v in self.comps.items()})

    def atoms(self):
        return core.atoms_of(self.comps.values())

    def components_text(self) -> dict[str, str]:
        """Canonical component text keyed by comma-joined basis labels."""
        labels = [self.frame.slot_labels(s) for s in self.sig]
        out = {}
        for k in sorted(self.comps):
            key = ",".join(labels[i][j] for i, j in enumerate(k))
            out[key] = str(self.comps[k])
        return out

    def __str__(self):
        if not self.sig:
            return str(self.value())
        if not self.comps:
            return "0"
        labels = [self.frame.slot_labels(s) for s in self.sig]
        parts = []
        for k in sorted(self.comps):
            basis = " ".join(labels[i][j] for i, j in enumerate(k))
            parts.append(f"({self.comps[k]}) {basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Tensor({self})"


def zero_tensor(frame: Frame, sig) -> Tensor:
    return Tensor(frame, sig)


def vector(frame: Frame, comps: Sequence) -> Tensor:
    return Tensor(frame, ((T, UP),), {(i,): c for i, c in enumerate(comps)})


def covector(frame: Frame, comps: Sequence) -> Tensor:
    return Tensor(frame, ((T, DOWN),), {(i,): c for i, c in enumerate(comps)})


def tensor_arith(op: str, *args) -> Tensor:
    if op == "add":
        a, b = args
        return a + b
    if op == "subtract":
        a, b = args
        return a - b
    if op == "scale":
        e, t = args
        return t.scale(e)
    raise GeometryError(f"unknown tensor operation {op!r}")


def _outer(a: Tensor, b: Tensor) -> Tensor:
    if a.frame is not b.frame:
        raise SignatureMismatch("tensors live on different frames")
    out = {}
    for ka, va in a.comps.items():
        for kb, vb in b.comps.items():
            out[ka + kb] = va * vb
    return Tensor(a.frame, a.sig + b.sig, out)


def _all_down_tangent(t: Tensor) -> bool:
    return all(s == (T, DOWN) for s in t.sig)


def _is_alternating(t: Tensor) -> bool:
    return symmetrize(t, list(range(t.rank)), "skew") == t


def tensor_product(a: Tensor, b: Tensor, kind: str = "plain") -> Tensor:
    """Outer product; ``wedge`` and ``symmetric`` variants are normalized so
    that ``dt ^ dr = dt dr - dr dt`` and ``du @ dv = du dv + dv du``."""
    if kind == "plain":
        return _outer(a, b)
    p, q = a.rank, b.rank
    factor = Fraction(math.factorial(p + q), math.factorial(p) * math.factorial(q))
    if kind == "wedge":
        if not (a.sig == ((T, DOWN),) * p and b.sig == ((T, DOWN),) * q) and \
                not (a.sig == ((T, UP),) * p and b.sig == ((T, UP),) * q):
            raise GeometryError("wedge product needs forms (or multivectors) on both sides")
        for t in (a, b):
            if t.rank > 1 and not _is_alternating(t):
                raise GeometryError("wedge product of a non-alternating tensor")
        return symmetrize(_outer(a, b), list(range(p + q)), "skew").scale(factor)
    if kind == "symmetric":
        o = _outer(a, b)
        if o.rank and len(set(o.sig)) != 1:
            raise GeometryError("symmetric product needs slots of one kind")
        return symmetrize(o, list(range(p + q)), "symmetric").scale(factor)
    raise GeometryError(f"unknown product kind {kind!r}")


def wedge(a: Tensor, b: Tensor) -> Tensor:
    return tensor_product(a, b, "wedge")


def sym_product(a: Tensor, b: Tensor) -> Tensor:
    return tensor_product(a, b, "symmetric")


def contract(t: Tensor, pairs: Sequence[tuple[int, int]]) -> Tensor:
    """Trace over each ``(i, j)`` slot pair (0-based); one slot up, one down."""
    pairs = [tuple(p) for p in pairs]
    used = [i for p in pairs for i in p]
    if len(set(used)) != len(used):
        raise GeometryError("a slot appears in two contraction pairs")
    for i, j in pairs:
        si, sj = t.sig[i], t.sig[j]
        if si[0] != sj[0] or si[1] == sj[1]:
            raise GeometryError(f"cannot contract slots {i} and {j}: {si} with {sj}")
    keep = [k for k in range(t.rank) if k not in used]
    out: dict[tuple, Expr] = {}
    for k, v in t.comps.items():
        if all(k[i] == k[j] for i, j in pairs):
            nk = tuple(k[m] for m in keep)
            s = out.get(nk, ZERO) + v
            out[nk] = s
    return Tensor(t.frame, tuple(t.sig[m] for m in keep), out)


def _perm_sign(p) -> int:
    sign, seen = 1, set()
    for i in range(len(p)):
        if i in seen:
            continue
        j, L = i, 0
        while j not in seen:
            seen.add(j)
            j = p[j]
            L += 1
        if L % 2 == 0:
            sign = -sign
    return sign


def symmetrize(t: Tensor, positions: Sequence[int], kind: str = "symmetric") -> Tensor:
    """Average over permutations of the given slots (with sign for ``skew``)."""
    positions = list(positions)
    if len({t.sig[i] for i in positions}) > 1:
        raise GeometryError("symmetrized slots must share space and variance")
    if kind not in ("symmetric", "skew"):
        raise GeometryError(f"unknown symmetrization {kind!r}")
    perms = list(itertools.permutations(range(len(positions))))
    w = Fraction(1, len(perms))
    out: dict[tuple, Expr] = {}
    for k, v in t.comps.items():
        sub = [k[i] for i in positions]
        for p in perms:
            nk = list(k)
            for a, b in enumerate(p):
                nk[positions[a]] = sub[b]
            c = w if kind == "symmetric" else w * _perm_sign(p)
            key = tuple(nk)
            out[key] = out.get(key, ZERO) + v * c
    return Tensor(t.frame, t.sig, out)


def _slot_contract(t: Tensor, pos: int, M, new_slot) -> Tensor:
    """Replace index at ``pos`` by sum_j M[new][j] t[..j..]."""
    out: dict[tuple, Expr] = {}
    n = len(M)
    for k, v in t.comps.items():
        j = k[pos]
        for a in range(n):
            m = M[a][j]
            if m.is_zero():
                continue
            nk = k[:pos] + (a,) + k[pos + 1:]
            out[nk] = out.get(nk, ZERO) + m * v
    sig = list(t.sig)
    sig[pos] = new_slot
    return Tensor(t.frame, sig, out)


def _realify(M, frame) -> list[list[complex]]:
    """Numeric metric in real coordinates x, y with zeta = x + i y, zetab = x - i y
    for every conjugate pair of coordinates."""
    n = frame.dim
    J = [[0j] * n for _ in range(n)]  # J[mu][k] = d coord_mu / d real_k
    done = set()
    for i, a in enumerate(frame.coords):
        b = frame.pairing.get(a)
        if b is None:
            J[i][i] = 1
            continue
        if i in done:
            continue
        j = frame.coords.index(b)
        done |= {i, j}
        J[i][i], J[i][j] = 1, 1j
        J[j][i], J[j][j] = 1, -1j
    return [[sum(J[m][k] * M[m][p] * J[p][l] for m in range(n) for p in range(n)) for l in range(n)]
            for k in range(n)]


class Metric:
    """Nondegenerate symmetric covariant 2-tensor with cached inverse."""

    def __init__(self, value: Tensor, signature: Sequence[int] | None = None):
        if value.sig != ((T, DOWN), (T, DOWN)):
            raise GeometryError("metric must have two covariant tangent slots")
        n = value.frame.dim
        for (a, b), e in value.comps.items():
            if e != value[b, a]:
                raise GeometryError("metric is not symmetric")
        self.value = value
        self.frame = value.frame
        self.matrix = [[value[i, j] for j in range(n)] for i in range(n)]
        try:
            inv = mat_inverse(self.matrix)
        except GeometryError as exc:
            raise GeometryError("singular metric") from exc
        self.inv_matrix = inv
        self.inverse = Tensor(self.frame, ((T, UP), (T, UP)),
                              {(i, j): inv[i][j] for i in range(n) for j in range(n)})
        if signature is None:
            exprs = [e for row in self.matrix for e in row]
            pt = sample_point(exprs)
            M = [[e.evalf(pt) for e in row] for row in self.matrix]
            if self.frame.holonomic and self.frame.pairing:
                M = _realify(M, self.frame)
            signature = sorted(_inertia(M))
            if signature.count(-1) > signature.count(1):
                signature = sorted(signature, reverse=True)
        self.signature = tuple(signature)

    @property
    def timelike_sign(self) -> int:
        """Sign of g on timelike vectors for Lorentzian signatures."""
        neg = self.signature.count(-1)
        return -1 if neg == 1 else 1

    def __call__(self, a: Tensor, b: Tensor) -> Expr:
        return inner_product(self, a, b)


def raise_lower(t: Tensor, g: Metric, positions: Sequence[int]) -> Tensor:
    """Flip the variance of the tangent slots at ``positions``."""
    for p in positions:
        space, var = t.sig[p]
        if space != T:
            raise GeometryError("raise_lower acts on tangent slots; use spinor epsilons for spinor slots")
        if var == UP:
            t = _slot_contract(t, p, g.matrix, (T, DOWN))
        else:
            t = _slot_contract(t, p, g.inv_matrix, (T, UP))
    return t


def inner_product(g: Metric, A, B):
    """Full contraction of A and B through g; Gram matrix for sequences."""
    if isinstance(A, (list, tuple)):
        return [[inner_product(g, a, b) for b in B] for a in A]
    if A.sig != B.sig:
        raise SignatureMismatch("inner product needs equal signatures")
    Bf = B
    for p, (space, var) in enumerate(B.sig):
        if space != T:
            raise GeometryError("inner_product handles tangent slots only")
        Bf = raise_lower(Bf, g, [p])
    total = ZERO
    for k, v in A.comps.items():
        w = Bf.comps.get(k)
        if w is not None:
            total = total + v * w
    return total


def frame_matrix(seq: Sequence[Tensor]) -> list[list[Expr]]:
    n = seq[0].frame.dim
    return [[t[i] for i in range(n)] for t in seq]


def dual_basis(seq: Sequence[Tensor]) -> list[Tensor]:
    """Dual frame of a coframe (or coframe of a frame): <theta^i, e_j> = delta."""
    if not seq:
        return []
    frame = seq[0].frame
    sig = seq[0].sig
    if sig not in (((T, UP),), ((T, DOWN),)) or any(t.sig != sig for t in seq):
        raise GeometryError("dual_basis needs a sequence of vectors or of 1-forms")
    A = frame_matrix(seq)
    if len(A) != frame.dim:
        raise GeometryError("dual_basis needs exactly dim elements")
    try:
        B = mat_inverse(A)  # A B = 1 -> columns of B pair with rows of A
    except GeometryError as exc:
        raise GeometryError("basis is singular") from exc
    other = ((T, DOWN),) if sig == ((T, UP),) else ((T, UP),)
    return [Tensor(frame, other, {(i,): B[i][j] for i in range(frame.dim)}) for j in range(frame.dim)]


def to_chart(t: Tensor) -> Tensor:
    """Express a tensor on an anholonomic frame in its chart's coordinate basis."""
    f = t.frame
    if f.holonomic:
        return t
    out = Tensor(f.chart, t.sig, t.comps)
    for p, (space, var) in enumerate(t.sig):
        if space != T:
            continue
        if var == UP:  # V^mu = sum_i V^i E_i^mu
            out = _slot_contract(out, p, transpose(f.vectors), (T, UP))
        else:  # w_mu = sum_i w_i theta^i_mu
            out = _slot_contract(out, p, transpose(f.coframe), (T, DOWN))
    return out


def to_frame(t: Tensor, frame: Frame) -> Tensor:
    """Express a tensor in another frame over the same chart."""
    t = to_chart(t)
    if frame.holonomic:
        if frame is not t.frame:
            raise GeometryError("frames belong to different charts")
        return t
    if frame.chart is not t.frame:
        raise GeometryError("frames belong to different charts")
    out = Tensor(frame, t.sig, t.comps)
    for p, (space, var) in enumerate(t.sig):
        if space != T:
            continue
        if var == UP:  # V^i = theta^i_mu V^mu
            out = _slot_contract(out, p, frame.coframe, (T, UP))
        else:  # w_i = E_i^mu w_mu
            out = _slot_contract(out, p, frame.vectors, (T, DOWN))
    return out


def commutator(X: Tensor, Y: Tensor) -> Tensor:
    """Lie bracket [X, Y] of vector fields on a common frame."""
    f = X.frame
    n = f.dim
    comps = {}
    for a in range(n):
        s = ZERO
        for i in range(n):
            xi, yi = X[i], Y[i]
            if not xi.is_zero():
                s = s + xi * f.apply(i, Y[a])
            if not yi.is_zero():
                s = s - yi * f.apply(i, X[a])
        for i, j in itertools.product(range(n), repeat=2):
            c = f.C(a, i, j)
            if not c.is_zero() and not X[i].is_zero() and not Y[j].is_zero():
                s = s + c * X[i] * Y[j]
        comps[(a,)] = s
    return Tensor(f, ((T, UP),), comps)


def frame_data(vectors: Sequence[Tensor], name: str = "E", labels: Sequence[str] | None = None,
               coframe_labels: Sequence[str] | None = None) -> Frame:
    """Anholonomic frame from coordinate vector fields, with structure functions."""
    chart = vectors[0].frame
    if not chart.holonomic:
        vectors = [to_chart(v) for v in vectors]
        chart = vectors[0].frame
    n = chart.dim
    if len(vectors) != n:
        raise GeometryError("frame needs exactly dim vector fields")
    V = frame_matrix(vectors)
    if mat_det(V).is_zero():
        raise GeometryError("frame vectors are linearly dependent")
    labels = list(labels or [f"{name}{i + 1}" for i in range(n)])
    coframe_labels = list(coframe_labels or [f"Theta{i + 1}" for i in range(n)])
    frame = Frame(name, chart.coords, labels, coframe_labels, vectors=V,
                  spinor_labels=chart.spinor_labels, pairing=chart.pairing, chart=chart)
    W = frame.coframe
    structure = {}
    for i in range(n):
        for j in range(i + 1, n):
            br = commutator(vectors[i], vectors[j])
            for k in range(n):
                c = ZERO
                for mu in range(n):
                    if not W[k][mu].is_zero() and not br[mu].is_zero():
                        c = c + W[k][mu] * br[mu]
                if not c.is_zero():
                    structure[(k, i, j)] = c
                    structure[(k, j, i)] = -c
    frame.structure = structure
    return frame


def brackets(frame: Frame) -> list[tuple[int, int, Tensor]]:
    """Nonzero [E_i, E_j] (i < j) expressed in the frame itself."""
    out = []
    n = frame.dim
    for i in range(n):
        for j in range(i + 1, n):
            comps = {(k,): frame.C(k, i, j) for k in range(n)}
            t = Tensor(frame, ((T, UP),), comps)
            if not t.is_zero():
                out.append((i, j, t))
    return out


def gram_schmidt(vectors: Sequence[Tensor], g: Metric) -> list[Tensor]:
    """Orthonormalize; each output has norm +1 or -1."""
    out: list[Tensor] = []
    norms: list[Expr] = []
    for step, v in enumerate(vectors):
        u = v
        for e, ne in zip(out, norms):
            c = inner_product(g, v, e) * ne  # ne = 1/g(e,e) = g(e,e) for unit vectors
            if not c.is_zero():
                u = u - e.scale(c)
        n2 = inner_product(g, u, u)
        if n2.is_zero():
            raise GeometryError(f"null or zero vector at Gram-Schmidt step {step + 1}")
        sign = numeric_sign(n2)
        norm = core.sqrt(n2 * sign)
        out.append(u.scale(norm.inverse()))
        norms.append(as_expr(sign))
    return out


def null_tetrad(orthonormal: Sequence[Tensor], g: Metric | None = None) -> list[Tensor]:
    """(l, n, m, mbar) from an orthonormal (e0, e1, e2, e3) with e0 timelike."""
    e0, e1, e2, e3 = orthonormal
    if g is not None:
        G = inner_product(g, list(orthonormal), list(orthonormal))
        s0 = G[0][0]
        ok = s0 in (ONE, -ONE) and all(
            (G[i][j] == (-s0 if i == j else ZERO)) for i in range(4) for j in range(4) if (i, j) != (0, 0))
        if not ok:
            raise GeometryError("null_tetrad needs Gram diag(-1,1,1,1) or diag(1,-1,-1,-1)")
    r = core.sqrt(2).inverse()
    l = (e0 + e3).scale(r)
    n = (e0 - e3).scale(r)
    m = (e1 + e2.scale(core.I)).scale(r)
    mb = (e1 - e2.scale(core.I)).scale(r)
    return [l, n, m, mb]
