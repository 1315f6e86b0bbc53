"""Canonical rational expressions over the Gaussian rationals.

An :class:`Expr` is a reduced fraction ``num/den`` of multivariate polynomials
with rational coefficients in a global, append-only table of interned atoms.
Algebraic atoms (``I``, ``sqrt(u)``, ``sin(u)``) carry a square rule; numerators
are kept of degree at most one in each of them and denominators are kept free
of them.  With that normalization two expressions are equal iff their
``(num, den)`` pairs are identical, so zero testing is exact.
"""

from __future__ import annotations

import cmath
import threading
from fractions import Fraction
from typing import Iterable, Mapping

import flint

COORD = "coordinate"
PARAM = "parameter"
IMAG = "imaginary-unit"
EXP = "exp"
SIN = "sin"
COS = "cos"
SQRT = "sqrt"
LOG = "log"
FUNC = "function"

TRANSCENDENTAL = (EXP, SIN, COS, SQRT, LOG)
_KIND_RANK = {COORD: 0, PARAM: 1, FUNC: 2, EXP: 3, COS: 4, SIN: 5, LOG: 6, SQRT: 7, IMAG: 8}


class ExprError(Exception):
    """Base class for kernel errors."""


class SingularPointError(ExprError):
    def __init__(self, denominator: str):
        super().__init__(f"denominator {denominator} vanishes at the given point")
        self.denominator = denominator


class NonlinearError(ExprError):
    pass


class UnsupportedError(ExprError):
    pass


# --------------------------------------------------------------------------
# global atom table and polynomial context
# --------------------------------------------------------------------------

_lock = threading.RLock()
_atoms: list["Atom"] = []
_intern: dict[tuple, "Atom"] = {}
_alg_indices: list[int] = []
_families: dict[str, "FunctionFamily"] = {}

_ctx = None
_gens: list = []
_cap = 0


def _grow(n: int) -> None:
    global _ctx, _gens, _cap
    if n <= _cap:
        return
    cap = max(64, _cap)
    while cap < n:
        cap *= 2
    _ctx = flint.fmpq_mpoly_ctx.get(("a", cap), "deglex")
    _gens = list(_ctx.gens())
    _cap = cap


_grow(1)


def _lift(p):
    if p.context() is _ctx:
        return p
    return p.project_to_context(_ctx)


def _const_poly(q):
    return _ctx.constant(q)


class FunctionFamily:
    """Name-level data shared by every ``f(arg)`` atom: reality and an optional
    declared derivative (for antiderivative atoms such as ``A(u)`` with
    ``A'(u) = a(u)/(P'(u) Q'(u))``)."""

    def __init__(self, name: str, real: bool = True):
        self.name = name
        self.real = real
        self.derivative: tuple[Atom, Expr] | None = None


def function_family(name: str, real: bool = True) -> FunctionFamily:
    with _lock:
        fam = _families.get(name)
        if fam is None:
            fam = _families[name] = FunctionFamily(name, real)
        return fam


def declare_derivative(name: str, var: "Atom", derivative: "Expr") -> None:
    """Give the opaque function ``name`` the derivative ``derivative`` written
    in terms of the dummy variable ``var`` (its argument)."""
    function_family(name).derivative = (var, derivative)


class Atom:
    """An interned algebraically independent generator of the expression field."""

    __slots__ = ("kind", "name", "arg", "order", "index", "real", "positive",
                 "square", "_expr", "_deps", "_dcache", "_sort_key")

    def __init__(self, kind, name, arg, order, real, positive):
        self.kind = kind
        self.name = name
        self.arg = arg
        self.order = order
        self.real = real
        self.positive = positive
        self.square: Expr | None = None
        self.index = -1
        self._expr = None
        self._deps = None
        self._dcache: dict = {}
        self._sort_key = None

    @property
    def expr(self) -> "Expr":
        if self._expr is None:
            self._expr = Expr(_gens[self.index], _const_poly(1))
        return self._expr

    @property
    def is_algebraic(self) -> bool:
        return self.square is not None

    @property
    def sort_key(self):
        if self._sort_key is None:
            self._sort_key = (_KIND_RANK[self.kind], self.name,
                              "" if self.arg is None else str(self.arg), self.order)
        return self._sort_key

    def variables(self) -> frozenset:
        """Coordinate and parameter atoms this atom depends on."""
        if self._deps is None:
            if self.kind in (COORD, PARAM):
                self._deps = frozenset([self])
            elif self.arg is None:
                self._deps = frozenset()
            else:
                self._deps = self.arg.variables()
        return self._deps

    def diff(self, v: "Atom") -> "Expr":
        out = self._dcache.get(v)
        if out is None:
            out = self._dcache[v] = self._diff(v)
        return out

    def _diff(self, v):
        if self.kind in (COORD, PARAM):
            return ONE if self is v else ZERO
        if self.kind == IMAG or v not in self.variables():
            return ZERO
        da = self.arg.diff(v)
        if self.kind == EXP:
            return da * self.expr
        if self.kind == SIN:
            return da * cos(self.arg)
        if self.kind == COS:
            return -da * sin(self.arg)
        if self.kind == SQRT:
            return da * self.expr / (2 * self.arg)
        if self.kind == LOG:
            return da / self.arg
        fam = _families[self.name]
        if fam.derivative is not None:
            var, d = fam.derivative
            return d.subs({var: self.arg}) * da
        return func(self.name, self.arg, self.order + 1) * da

    def __repr__(self):
        return f"Atom({self})"

    def __str__(self):
        if self.kind in (COORD, PARAM):
            return self.name
        if self.kind == IMAG:
            return "I"
        if self.kind == FUNC:
            return f"{self.name}{chr(39) * self.order}({self.arg})"
        return f"{self.kind}({self.arg})"

    def __lt__(self, other):
        return self.sort_key < other.sort_key


def _make_atom(kind, name, arg=None, order=0, real=True, positive=False, square=None):
    key = (kind, name, None if arg is None else arg.key(), order)
    with _lock:
        atom = _intern.get(key)
        if atom is not None:
            return atom
        atom = Atom(kind, name, arg, order, real, positive)
        atom.index = len(_atoms)
        _grow(atom.index + 1)
        _atoms.append(atom)
        _intern[key] = atom
        if square is not None:
            atom.square = square
            _alg_indices.append(atom.index)
        return atom


def coordinate(name: str, real: bool = True) -> Atom:
    return _make_atom(COORD, name, real=real)


def parameter(name: str, real: bool = True, positive: bool = False) -> Atom:
    atom = _make_atom(PARAM, name, real=real, positive=positive)
    if positive:
        atom.positive = True
    return atom


def atoms_table() -> list[Atom]:
    return list(_atoms)


# --------------------------------------------------------------------------
# canonicalization helpers
# --------------------------------------------------------------------------

def _alg_degrees(p):
    degs = p.degrees()
    return [i for i in _alg_indices if i < len(degs) and degs[i] > 0], degs


def _reduce_alg(p):
    if not _alg_indices:
        return p
    degs = p.degrees()
    for i in _alg_indices:
        if i < len(degs) and degs[i] >= 2:
            g2 = _gens[i] * _gens[i]
            sq = _lift(_atoms[i].square.num)
            while True:
                q, r = divmod(p, g2)
                if q.is_zero():
                    break
                p = q * sq + r
            degs = p.degrees()
    return p


def _conj_alg(p, i):
    args = list(_gens)
    args[i] = -_gens[i]
    return p.compose(*args)


def _rationalize(num, den):
    while True:
        present, _ = _alg_degrees(den)
        if not present:
            return num, den
        c = _conj_alg(den, present[0])
        num = _reduce_alg(num * c)
        den = _reduce_alg(den * c)


def _finish(num, den, reduce=True):
    if num.is_zero():
        return ZERO
    if reduce:
        num = _reduce_alg(num)
        if num.is_zero():
            return ZERO
    if den.is_constant():
        c = den.leading_coefficient()
        if c != 1:
            num = num / c
        return Expr(num, _const_poly(1))
    g = num.gcd(den)
    if not g.is_one():
        num = num / g
        den = den / g
        if den.is_constant():
            return Expr(num / den.leading_coefficient(), _const_poly(1))
    c = den.leading_coefficient()
    if c != 1:
        num = num / c
        den = den / c
    return Expr(num, den)


def _from_parts(num, den):
    """Canonicalize an arbitrary fraction (den may contain algebraic atoms)."""
    if den.is_zero():
        raise ZeroDivisionError("division by zero expression")
    num = _reduce_alg(num)
    den = _reduce_alg(den)
    num, den = _rationalize(num, den)
    return _finish(num, den)


def _as_expr(x) -> "Expr":
    if isinstance(x, Expr):
        return x
    if isinstance(x, Atom):
        return x.expr
    if isinstance(x, bool):
        raise TypeError("bool is not an expression")
    if isinstance(x, int):
        return Expr(_const_poly(x), _const_poly(1)) if x else ZERO
    if isinstance(x, Fraction):
        return Expr(_const_poly(flint.fmpq(x.numerator, x.denominator)), _const_poly(1)) if x else ZERO
    if isinstance(x, (flint.fmpq, flint.fmpz)):
        return Expr(_const_poly(x), _const_poly(1)) if x != 0 else ZERO
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _fmpq_to_fraction(q) -> Fraction:
    q = flint.fmpq(q)
    return Fraction(int(q.p), int(q.q))


# --------------------------------------------------------------------------
# Expr
# --------------------------------------------------------------------------

class Expr:
    """Immutable canonical expression.  Use the module-level constructors and
    arithmetic operators; the raw constructor assumes canonical input."""

    __slots__ = ("_num", "_den", "_hash", "_str")

    def __init__(self, num, den):
        self._num = num
        self._den = den
        self._hash = None
        self._str = None

    # -- raw parts ---------------------------------------------------------
    @property
    def num(self):
        return _lift(self._num)

    @property
    def den(self):
        return _lift(self._den)

    def numerator(self) -> "Expr":
        return Expr(self.num, _const_poly(1))

    def denominator(self) -> "Expr":
        return Expr(self.den, _const_poly(1))

    def key(self):
        return (str(self._num), str(self._den))

    # -- predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return self._num.is_zero()

    def is_constant(self) -> bool:
        return self._num.is_constant() and self._den.is_constant()

    def is_polynomial(self) -> bool:
        return self._den.is_constant()

    def is_rational(self) -> bool:
        """True for elements of Q (no atoms at all)."""
        return self.is_constant()

    def as_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a rational constant")
        if self.is_zero():
            return Fraction(0)
        return _fmpq_to_fraction(self._num.leading_coefficient())

    def atoms(self) -> set[Atom]:
        out = set()
        for p in (self._num, self._den):
            for i, d in enumerate(p.degrees()):
                if d > 0:
                    out.add(_atoms[i])
        return out

    def variables(self) -> frozenset:
        out = set()
        for a in self.atoms():
            out |= a.variables()
        return frozenset(out)

    def depends_on(self, v: Atom) -> bool:
        return any(v in a.variables() for a in self.atoms())

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        an, ad, bn, bd = self.num, self.den, o.num, o.den
        if ad.is_one() and bd.is_one():
            s = an + bn
            return ZERO if s.is_zero() else Expr(s, ad)
        if ad == bd:
            return _finish(an + bn, ad, reduce=False)
        g = ad.gcd(bd)
        if g.is_one():
            return _finish(an * bd + bn * ad, ad * bd, reduce=False)
        bdg = bd / g
        return _finish(an * bdg + bn * (ad / g), ad * bdg, reduce=False)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        return Expr(-self.num, self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return ZERO
        an, ad, bn, bd = self.num, self.den, o.num, o.den
        needs = False
        if _alg_indices:
            da, db = an.degrees(), bn.degrees()
            needs = any(i < len(da) and da[i] > 0 and db[i] > 0 for i in _alg_indices)
        if needs:
            return _finish(an * bn, ad * bd)
        if ad.is_one() and bd.is_one():
            return Expr(an * bn, ad)
        if not bd.is_one():
            g = an.gcd(bd)
            if not g.is_one():
                an, bd = an / g, bd / g
        if not ad.is_one():
            g = bn.gcd(ad)
            if not g.is_one():
                bn, ad = bn / g, ad / g
        num, den = an * bn, ad * bd
        c = den.leading_coefficient()
        if c != 1:
            num, den = num / c, den / c
        return Expr(num, den)

    __rmul__ = __mul__

    def inverse(self) -> "Expr":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero expression")
        return _from_parts(self.den, self.num)

    def __truediv__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by zero expression")
        if o.is_constant():
            return Expr(self.num / o._num.leading_coefficient(), self.den) if not self.is_zero() else ZERO
        return self * o.inverse()

    def __rtruediv__(self, other):
        try:
            o = _as_expr(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ONE
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Expr):
            try:
                other = _as_expr(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    # -- calculus and substitution ---------------------------------------------
    def diff(self, v: Atom) -> "Expr":
        if self.is_zero():
            return ZERO
        num, den = self.num, self.den
        dn, dn_extra = _poly_diff(num, v)
        if den.is_one():
            base = ZERO if dn.is_zero() else _finish(dn, den)
            return base if dn_extra is None else base + dn_extra
        dd, dd_extra = _poly_diff(den, v)
        if dn_extra is None and dd_extra is None:
            top = dn * den - num * dd
            if top.is_zero():
                return ZERO
            return _finish(top, den * den)
        n_e, d_e = Expr(num, _const_poly(1)), Expr(den, _const_poly(1))
        dn_e = _finish(dn, _const_poly(1)) if not dn.is_zero() else ZERO
        dd_e = _finish(dd, _const_poly(1)) if not dd.is_zero() else ZERO
        if dn_extra is not None:
            dn_e = dn_e + dn_extra
        if dd_extra is not None:
            dd_e = dd_e + dd_extra
        return (dn_e * d_e - n_e * dd_e) / (d_e * d_e)

    def subs(self, bindings: Mapping) -> "Expr":
        """Simultaneous substitution of atoms by expressions."""
        if not bindings or self.is_constant():
            return self
        binds = {a: _as_expr(e) for a, e in bindings.items()}
        return _substitute(self, binds)

    def conjugate(self, pairing: Mapping | None = None) -> "Expr":
        return conjugate(self, pairing)

    def evalf(self, values: Mapping) -> complex:
        memo = {}
        n = _eval_poly_num(self._num, values, memo)
        d = _eval_poly_num(self._den, values, memo)
        return n / d

    # -- printing -------------------------------------------------------------
    def __str__(self):
        if self._str is None:
            self._str = _format(self)
        return self._str

    def __repr__(self):
        return f"Expr({self})"


ZERO = None
ONE = None
ZERO = Expr(_const_poly(0), _const_poly(1))
ONE = Expr(_const_poly(1), _const_poly(1))


def const(n, d=1) -> Expr:
    if d == 1:
        return _as_expr(n)
    return _as_expr(Fraction(n, d))


def as_expr(x) -> Expr:
    return _as_expr(x)


# --------------------------------------------------------------------------
# differentiation of raw polynomials
# --------------------------------------------------------------------------

def _poly_diff(p, v: Atom):
    """Total derivative of polynomial ``p`` w.r.t. variable ``v``.  Returns the
    polynomial part and an optional Expr part (atoms with rational derivatives)."""
    acc = _const_poly(0)
    extra = None
    for i, d in enumerate(p.degrees()):
        if d <= 0:
            continue
        a = _atoms[i]
        if a is not v and v not in a.variables():
            continue
        da = a.diff(v)
        if da.is_zero():
            continue
        part = p.derivative(i)
        if da.is_polynomial():
            acc = acc + part * da.num
        else:
            term = _finish(part, _const_poly(1)) * da
            extra = term if extra is None else extra + term
    return acc, extra


# --------------------------------------------------------------------------
# substitution, conjugation, numeric evaluation
# --------------------------------------------------------------------------

def _rebuild(atom: Atom, new_arg: Expr) -> Expr:
    if atom.kind == EXP:
        return exp(new_arg)
    if atom.kind == SIN:
        return sin(new_arg)
    if atom.kind == COS:
        return cos(new_arg)
    if atom.kind == SQRT:
        return sqrt(new_arg)
    if atom.kind == LOG:
        return log(new_arg)
    if atom.kind == FUNC:
        return func(atom.name, new_arg, atom.order)
    raise AssertionError(atom.kind)


def _atom_images(support, image_of):
    images = {}
    for a in support:
        img = image_of(a)
        if img is not None:
            images[a.index] = img
    return images


def _apply_images(e: Expr, images: dict[int, Expr]) -> Expr:
    if not images:
        return e
    num, den = e.num, e.den
    if all(img.is_polynomial() for img in images.values()):
        args = list(_gens)
        for i, img in images.items():
            args[i] = img.num
        n2 = num.compose(*args) if not num.is_constant() else num
        d2 = den.compose(*args) if not den.is_constant() else den
        if d2.is_zero():
            raise SingularPointError(str(Expr(den, _const_poly(1))))
        if n2.is_zero():
            return ZERO
        return _from_parts(n2, d2)
    n2 = _eval_poly_expr(num, images)
    d2 = _eval_poly_expr(den, images)
    if d2.is_zero():
        raise SingularPointError(str(Expr(den, _const_poly(1))))
    return n2 / d2


def _eval_poly_expr(p, images: dict[int, Expr]) -> Expr:
    if p.is_constant():
        return _finish(p, _const_poly(1)) if not p.is_zero() else ZERO
    # split: variables kept as-is stay inside a polynomial coefficient
    keep_args = list(_gens)
    idx = sorted(images)
    for i in idx:
        keep_args[i] = _const_poly(1)
    groups: dict[tuple, list] = {}
    for exps, c in p.terms():
        key = tuple(exps[i] for i in idx)
        groups.setdefault(key, []).append((exps, c))
    total = ZERO
    pow_cache: dict[tuple[int, int], Expr] = {}
    for key, terms in groups.items():
        coeff_poly = _ctx.from_dict({tuple(0 if j in images else e for j, e in enumerate(exps)): c
                                     for exps, c in terms})
        term = _finish(coeff_poly, _const_poly(1))
        for i, k in zip(idx, key):
            if k:
                pk = pow_cache.get((i, k))
                if pk is None:
                    pk = pow_cache[(i, k)] = images[i] ** k
                term = term * pk
        total = total + term
    return total


def _substitute(e: Expr, binds: dict[Atom, Expr]) -> Expr:
    bound = set(binds)
    memo: dict[Atom, Expr | None] = {}

    def image_of(a: Atom):
        if a in memo:
            return memo[a]
        if a in binds:
            out = binds[a]
        elif a.arg is not None and a.variables() & bound:
            out = _rebuild(a, a.arg.subs(binds))
        else:
            out = None
        memo[a] = out
        return out

    return _apply_images(e, _atom_images(e.atoms(), image_of))


def conjugate(e: Expr, pairing: Mapping | None = None) -> Expr:
    """Complex conjugate: ``I -> -I``, paired atoms swapped, real atoms fixed."""
    pairing = dict(pairing or {})
    for a, b in list(pairing.items()):
        pairing.setdefault(b, a)
    memo: dict[Atom, Expr | None] = {}

    def image_of(a: Atom):
        if a in memo:
            return memo[a]
        out = None
        if a.kind == IMAG:
            out = -a.expr
        elif a in pairing:
            out = pairing[a].expr
        elif a.kind in (COORD, PARAM):
            if not a.real:
                raise ExprError(f"unpaired complex {a.kind} {a.name}")
        elif a.kind == FUNC and not _families[a.name].real:
            raise ExprError(f"complex function {a.name} has no conjugate partner")
        else:
            new_arg = conjugate(a.arg, pairing)
            if new_arg != a.arg:
                out = _rebuild(a, new_arg)
        memo[a] = out
        return out

    return _apply_images(e, _atom_images(e.atoms(), image_of))


def _atom_value(a: Atom, values: Mapping, memo: dict):
    if a in memo:
        return memo[a]
    if a in values:
        v = complex(values[a])
    elif a.kind == IMAG:
        v = 1j
    elif a.kind in (COORD, PARAM):
        raise KeyError(f"no numeric value for {a}")
    elif a.kind == FUNC:
        raise KeyError(f"no numeric value for {a}")
    else:
        x = a.arg.evalf(values)
        v = {EXP: cmath.exp, SIN: cmath.sin, COS: cmath.cos, SQRT: cmath.sqrt, LOG: cmath.log}[a.kind](x)
    memo[a] = v
    return v


def _eval_poly_num(p, values, memo) -> complex:
    total = 0j
    for exps, c in p.terms():
        t = complex(_fmpq_to_fraction(c))
        for i, k in enumerate(exps):
            if k:
                t *= _atom_value(_atoms[i], values, memo) ** int(k)
        total += t
    return total


# --------------------------------------------------------------------------
# transcendental and algebraic constructors
# --------------------------------------------------------------------------

def _check_poly_in_variables(e: Expr, what: str):
    if not e.is_polynomial():
        raise UnsupportedError(f"{what} argument must be polynomial: {e}")
    for a in e.atoms():
        if a.kind not in (COORD, PARAM):
            raise UnsupportedError(f"{what} argument must involve only coordinates and parameters: {e}")


def _monomial_expr(exps) -> Expr:
    return Expr(_ctx.from_dict({tuple(exps): 1}), _const_poly(1))


I = None


def _imag_atom() -> Atom:
    return _make_atom(IMAG, "I", square=ZERO - ONE)


I = _imag_atom().expr


def exp(e) -> Expr:
    """``exp`` of a polynomial, split as a product of ``exp(monomial/d)`` atoms."""
    e = _as_expr(e)
    if e.is_zero():
        return ONE
    _check_poly_in_variables(e, "exp")
    result = ONE
    for exps, c in e.num.terms():
        q = _fmpq_to_fraction(c)
        if not any(exps):
            base = _make_atom(EXP, "exp", arg=_as_expr(Fraction(1) if q.denominator == 1 else Fraction(1, q.denominator)))
            result = result * base.expr ** q.numerator
            continue
        mono = _monomial_expr(exps)
        arg = mono if q.denominator == 1 else mono / q.denominator
        atom = _make_atom(EXP, "exp", arg=arg)
        result = result * atom.expr ** q.numerator
    return result


def _normalize_sign(e: Expr) -> tuple[Expr, bool]:
    lc = e.num.leading_coefficient()
    return (-e, True) if lc < 0 else (e, False)


def cos(e) -> Expr:
    e = _as_expr(e)
    if e.is_zero():
        return ONE
    _check_poly_in_variables(e, "cos")
    e, _ = _normalize_sign(e)
    return _make_atom(COS, "cos", arg=e).expr


def sin(e) -> Expr:
    e = _as_expr(e)
    if e.is_zero():
        return ZERO
    _check_poly_in_variables(e, "sin")
    e, neg = _normalize_sign(e)
    c = _make_atom(COS, "cos", arg=e).expr
    atom = _make_atom(SIN, "sin", arg=e, square=ONE - c * c)
    return -atom.expr if neg else atom.expr


def log(e) -> Expr:
    e = _as_expr(e)
    if e == ONE:
        return ZERO
    for a in e.atoms():
        if a.is_algebraic:
            raise UnsupportedError(f"log of algebraic expression: {e}")
    return _make_atom(LOG, "log", arg=e).expr


def _int_square_split(m: int) -> tuple[int, int]:
    """m = s^2 * k with k squarefree (sign kept in k)."""
    sign = -1 if m < 0 else 1
    m = abs(m)
    s, k = 1, 1
    for p, e in (flint.fmpz(m).factor() if m > 1 else []):
        p = int(p)
        s *= p ** (e // 2)
        if e % 2:
            k *= p
    return s, sign * k


def sqrt(e) -> Expr:
    """Square root; perfect-square factors of the argument are pulled out
    (taken positive), the squarefree rest becomes an algebraic atom."""
    e = _as_expr(e)
    if e.is_zero():
        return ZERO
    for a in e.atoms():
        if a.is_algebraic:
            raise UnsupportedError(f"nested radical or complex argument in sqrt: {e}")
    prod = e.num * e.den
    content, factors = prod.factor_squarefree()
    outside = ONE / Expr(e.den, _const_poly(1)) if not e.den.is_one() else ONE
    inside = _const_poly(1)
    for f, k in factors:
        if k // 2:
            outside = outside * _finish(f ** (k // 2), _const_poly(1))
        if k % 2:
            inside = inside * f
    q = _fmpq_to_fraction(content)
    s, k = _int_square_split(q.numerator * q.denominator)
    outside = outside * Fraction(s, q.denominator)
    if inside.is_constant():
        if k == 1:
            return outside
        if k == -1:
            return outside * I
        if k < 0:
            return outside * I * _make_atom(SQRT, "sqrt", arg=_as_expr(-k), square=_as_expr(-k)).expr
        return outside * _make_atom(SQRT, "sqrt", arg=_as_expr(k), square=_as_expr(k)).expr
    arg = _finish(inside * k, _const_poly(1))
    return outside * _make_atom(SQRT, "sqrt", arg=arg, square=arg).expr


def func(name: str, arg, order: int = 0, real: bool | None = None) -> Expr:
    """Opaque function atom ``name^(order)(arg)``."""
    arg = _as_expr(arg)
    fam = function_family(name, True if real is None else real)
    if fam.derivative is not None and order > 0:
        var, d = fam.derivative
        out = d
        for _ in range(order - 1):
            out = out.diff(var)
        return out.subs({var: arg})
    return _make_atom(FUNC, name, arg=arg, order=order, real=fam.real).expr


# --------------------------------------------------------------------------
# canonical printing
# --------------------------------------------------------------------------

def _poly_terms_sorted(p, scale=1):
    terms = []
    for exps, c in p.terms():
        mono = sorted(((_atoms[i], int(k)) for i, k in enumerate(exps) if k), key=lambda t: t[0].sort_key)
        terms.append((mono, _fmpq_to_fraction(c) * scale))
    order = sorted({a.sort_key for mono, _ in terms for a, _ in mono})
    pos = {k: j for j, k in enumerate(order)}

    def tkey(t):
        mono, _ = t
        vec = [0] * len(order)
        for a, k in mono:
            vec[pos[a.sort_key]] = k
        return (-sum(vec), [-v for v in vec])

    terms.sort(key=tkey)
    return terms


def _fmt_mono(mono) -> str:
    parts = []
    for a, k in mono:
        s = str(a)
        parts.append(s if k == 1 else f"{s}^{k}")
    return "*".join(parts)


def _fmt_terms(terms) -> str:
    out = []
    for j, (mono, c) in enumerate(terms):
        neg = c < 0
        a = -c if neg else c
        m = _fmt_mono(mono)
        if not m:
            body = str(a)
        elif a == 1:
            body = m
        else:
            body = f"{a}*{m}"
        if j == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def _format(e: Expr) -> str:
    if e.is_zero():
        return "0"
    den_terms = _poly_terms_sorted(e._den)
    if e._den.is_constant():
        return _fmt_terms(_poly_terms_sorted(e._num))
    # scale so the denominator is a primitive integer polynomial with
    # positive leading coefficient under the printing order
    from math import gcd, lcm
    coeffs = [c for _, c in den_terms]
    L = 1
    for c in coeffs:
        L = lcm(L, c.denominator)
    G = 0
    for c in coeffs:
        G = gcd(G, int(c * L))
    scale = Fraction(L, G)
    if den_terms[0][1] < 0:
        scale = -scale
    den_terms = _poly_terms_sorted(e._den, scale)
    num_terms = _poly_terms_sorted(e._num, scale)
    ns = _fmt_terms(num_terms)
    ds = _fmt_terms(den_terms)
    if len(num_terms) > 1:
        ns = f"({ns})"
    if len(den_terms) > 1 or (den_terms[0][1] != 1) or len(den_terms[0][0]) > 1:
        ds = f"({ds})"
    return f"{ns}/{ds}"


def atoms_of(exprs: Iterable[Expr]) -> set[Atom]:
    out = set()
    for e in exprs:
        out |= e.atoms()
    return out
