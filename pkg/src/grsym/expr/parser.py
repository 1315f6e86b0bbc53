"""Tokenizer and precedence parser for scalar and tensor expressions.

The parser produces a small tuple AST shared by the scalar evaluator here and
the tensor evaluator of the DSL.  Precedence, lowest first::

    + -      & @      * /      unary -      ^

``^`` is power when the right operand is an integer literal and the left is
scalar; the DSL reinterprets it as a wedge product between tensors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from . import core
from .core import Atom, Expr

RESERVED_FUNCS = {"exp": core.exp, "sin": core.sin, "cos": core.cos,
                  "sqrt": core.sqrt, "log": core.log}


class ParseError(core.ExprError):
    def __init__(self, message: str, pos: int = -1, source: str = ""):
        self.pos = pos
        self.line, self.col = _line_col(source, pos) if pos >= 0 else (0, 0)
        where = f" at line {self.line}, column {self.col}" if pos >= 0 else ""
        super().__init__(f"{message}{where}")
        self.bare = message


class UndeclaredError(ParseError):
    pass


def _line_col(source: str, pos: int) -> tuple[int, int]:
    line = source.count("\n", 0, pos) + 1
    col = pos - (source.rfind("\n", 0, pos) + 1) + 1
    return line, col


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "end"
    text: str
    pos: int


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def tokenize(source: str) -> list[Token]:
    out = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:  # trailing whitespace
            break
        if m.group(1) is not None:
            out.append(Token("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(Token("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^&@(),'{}[]=:;<>.":
                raise ParseError(f"unexpected character {ch!r}", m.start(3), source)
            out.append(Token("op", ch, m.start(3)))
        pos = m.end()
    out.append(Token("end", "", n))
    return out


class Parser:
    """Recursive-descent parser over a token list; usable on a slice of a
    larger statement (the DSL calls :meth:`parse_expr` and then continues)."""

    def __init__(self, source: str, tokens: list[Token] | None = None, start: int = 0):
        self.source = source
        self.tokens = tokens if tokens is not None else tokenize(source)
        self.i = start

    # -- token helpers --------------------------------------------------------
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text == text

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.kind != "op" or t.text != text:
            found = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", t.pos, self.source)
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.peek()
        return ParseError(msg, tok.pos, self.source)

    # -- grammar --------------------------------------------------------------
    def parse_expr(self):
        node = self._products()
        while self.at("+") or self.at("-"):
            op = self.next().text
            node = ("bin", op, node, self._products())
        return node

    def _products(self):
        node = self._term()
        while self.at("&") or self.at("@"):
            op = self.next().text
            node = ("bin", op, node, self._term())
        return node

    def _term(self):
        node = self._unary()
        while self.at("*") or self.at("/"):
            op = self.next().text
            node = ("bin", op, node, self._unary())
        return node

    def _unary(self):
        if self.at("-"):
            self.next()
            return ("neg", self._unary())
        if self.at("+"):
            self.next()
            return self._unary()
        return self._power()

    def _power(self):
        node = self._base()
        while self.at("^"):
            tok = self.next()
            if self.at("-") and self.tokens[self.i + 1].kind == "int":
                self.next()
                node = ("pow", node, -int(self.next().text), tok.pos)
            elif self.peek().kind == "int":
                node = ("pow", node, int(self.next().text), tok.pos)
            else:
                node = ("wedge", node, self._base(), tok.pos)
        return node

    def _base(self):
        tok = self.next()
        if tok.kind == "int":
            return ("num", Fraction(int(tok.text)))
        if tok.kind == "name":
            primes = 0
            while self.at("'"):
                self.next()
                primes += 1
            if self.at("("):
                self.next()
                arg = self.parse_expr()
                self.expect(")")
                return ("call", tok.text, primes, arg, tok.pos)
            if primes:
                raise self.error("derivative primes must be followed by an argument")
            return ("name", tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.pos, self.source)


def parse_ast(source: str):
    p = Parser(source)
    node = p.parse_expr()
    if p.peek().kind != "end":
        raise p.error(f"unexpected {p.peek().text!r}")
    return node


# --------------------------------------------------------------------------
# scalar evaluation
# --------------------------------------------------------------------------

class Context:
    """Identifier declarations for the scalar parser: named atoms or bound
    expressions, and the names of opaque functions."""

    def __init__(self, names: Mapping[str, Atom | Expr] | None = None,
                 functions: set[str] | None = None):
        self.names: dict[str, Atom | Expr] = dict(names or {})
        self.functions: set[str] = set(functions or ())

    def lookup(self, name: str):
        return self.names.get(name)


def eval_scalar(node, ctx: Context, source: str = "") -> Expr:
    kind = node[0]
    if kind == "num":
        return core.as_expr(node[1])
    if kind == "name":
        name, pos = node[1], node[2]
        if name == "I":
            return core.I
        v = ctx.lookup(name)
        if v is None:
            raise UndeclaredError(f"undeclared identifier {name!r}", pos, source)
        if isinstance(v, Atom):
            return v.expr
        if isinstance(v, Expr):
            return v
        raise ParseError(f"{name!r} is not a scalar", pos, source)
    if kind == "call":
        _, name, primes, arg, pos = node
        a = eval_scalar(arg, ctx, source)
        if name in RESERVED_FUNCS:
            if primes:
                raise ParseError(f"primes are not allowed on {name}", pos, source)
            return RESERVED_FUNCS[name](a)
        if name not in ctx.functions:
            raise UndeclaredError(f"undeclared function {name!r}", pos, source)
        return core.func(name, a, primes)
    if kind == "neg":
        return -eval_scalar(node[1], ctx, source)
    if kind == "pow":
        return eval_scalar(node[1], ctx, source) ** node[2]
    if kind == "bin":
        _, op, a, b = node
        x, y = eval_scalar(a, ctx, source), eval_scalar(b, ctx, source)
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        if op == "/":
            if y.is_zero():
                raise core.ExprError("division by zero")
            return x / y
        raise ParseError(f"operator {op!r} needs tensor operands", -1, source)
    if kind == "wedge":
        raise ParseError("'^' needs an integer exponent in a scalar expression", node[3], source)
    raise AssertionError(kind)


def parse(source: str, context: Context | Mapping | None = None) -> Expr:
    """Parse a scalar expression into its canonical :class:`Expr`."""
    if not isinstance(context, Context):
        context = Context(context or {})
    return eval_scalar(parse_ast(source), context, source)


def eval_numeric(node, values: Mapping[str, complex],
                 functions: Mapping[str, Callable] | None = None) -> complex:
    """Direct floating evaluation of an (unsimplified) AST."""
    import cmath
    fns = {"exp": cmath.exp, "sin": cmath.sin, "cos": cmath.cos,
           "sqrt": cmath.sqrt, "log": cmath.log}
    fns.update(functions or {})
    kind = node[0]
    if kind == "num":
        return complex(node[1])
    if kind == "name":
        return 1j if node[1] == "I" else complex(values[node[1]])
    if kind == "call":
        return fns[node[1]](eval_numeric(node[3], values, functions))
    if kind == "neg":
        return -eval_numeric(node[1], values, functions)
    if kind == "pow":
        return eval_numeric(node[1], values, functions) ** node[2]
    _, op, a, b = node
    x, y = eval_numeric(a, values, functions), eval_numeric(b, values, functions)
    return {"+": x + y, "-": x - y, "*": x * y}[op] if op != "/" else x / y
