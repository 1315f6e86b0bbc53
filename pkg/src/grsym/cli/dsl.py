"""Statement splitting and tensor-expression evaluation for the script DSL.

A script is a sequence of ``;``-terminated statements; ``#`` starts a comment
that runs to the end of the line.  Expressions reuse the kernel parser's AST
and are evaluated here with tensor semantics for the basis symbols
``d<coord>`` and ``D_<coord>``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..expr import core
from ..expr.core import Atom, Expr, ExprError
from ..expr.parser import ParseError, UndeclaredError, parse_ast, RESERVED_FUNCS
from ..manifold import Tensor, sym_product, tensor_product, wedge


@dataclass
class Statement:
    text: str
    line: int       # 1-based line of the first character of ``text``
    offset: int     # position of ``text`` in the script

    @property
    def head(self) -> str:
        return self.text.split(None, 1)[0] if self.text.strip() else ""


class ScriptError(Exception):
    """A DSL error carrying a script line number; ``code`` is the exit status."""

    def __init__(self, message: str, line: int, code: int = 2):
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line
        self.code = code


def split_statements(source: str) -> list[Statement]:
    cleaned = []
    for raw in source.split("\n"):
        cut = raw.find("#")
        cleaned.append(raw if cut < 0 else raw[:cut] + " " * (len(raw) - cut))
    text = "\n".join(cleaned)
    out: list[Statement] = []
    start = 0
    depth = 0
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == ";" and depth == 0:
            _push(out, text, start, i)
            start = i + 1
    if text[start:].strip():
        first = start + len(text[start:]) - len(text[start:].lstrip())
        raise ScriptError("statement is missing its terminating ';'", text.count("\n", 0, first) + 1)
    return out


def _push(out, text, start, end):
    chunk = text[start:end]
    stripped = chunk.lstrip()
    if not stripped.strip():
        return
    first = start + len(chunk) - len(stripped)
    out.append(Statement(stripped.rstrip(), text.count("\n", 0, first) + 1, first))


def split_top(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside brackets."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

class Evaluator:
    """Evaluates expression ASTs against a session namespace.

    ``lookup(name)`` returns an Atom, Expr, Tensor (or Metric) or None;
    ``frame`` is the active chart; ``functions`` holds opaque function names.
    """

    def __init__(self, lookup, frame, functions: set[str]):
        self.lookup = lookup
        self.frame = frame
        self.functions = functions

    def evaluate(self, text: str, line: int):
        try:
            node = parse_ast(text)
            return self._eval(node, text)
        except ParseError as e:
            raise ScriptError(e.bare, line + max(e.line - 1, 0)) from e

    def _basis(self, name: str):
        f = self.frame
        if f is None:
            return None
        if name.startswith("D_") and name[2:] in {c.name for c in f.coords}:
            return f.vector(f.index_of(name[2:]))
        if name.startswith("d") and name[1:] in {c.name for c in f.coords}:
            return f.form(f.index_of(name[1:]))
        return None

    def _eval(self, node, src):
        kind = node[0]
        if kind == "num":
            return core.as_expr(node[1])
        if kind == "name":
            name, pos = node[1], node[2]
            if name == "I":
                return core.I
            v = self.lookup(name)
            if v is None:
                v = self._basis(name)
            if v is None:
                raise UndeclaredError(f"undeclared identifier {name!r}", pos, src)
            if isinstance(v, Atom):
                return v.expr
            if hasattr(v, "value") and not isinstance(v, (Tensor, Expr)) and isinstance(v.value, Tensor):
                return v.value   # a Metric used inside an expression
            if isinstance(v, (Expr, Tensor)):
                return v
            raise ParseError(f"{name!r} cannot be used in an expression", pos, src)
        if kind == "call":
            _, name, primes, arg, pos = node
            a = self._eval(arg, src)
            if not isinstance(a, Expr):
                raise ParseError(f"{name} needs a scalar argument", pos, src)
            if name in RESERVED_FUNCS:
                if primes:
                    raise ParseError(f"primes are not allowed on {name}", pos, src)
                return RESERVED_FUNCS[name](a)
            if name not in self.functions:
                raise UndeclaredError(f"undeclared function {name!r}", pos, src)
            return core.func(name, a, primes)
        if kind == "neg":
            v = self._eval(node[1], src)
            return v.scale(-1) if isinstance(v, Tensor) else -v
        if kind == "pow":
            base = self._eval(node[1], src)
            if isinstance(base, Tensor):
                raise ParseError("powers of tensors are not defined; use '&' or '@'", node[3], src)
            return base ** node[2]
        if kind == "wedge":
            a, b = self._eval(node[1], src), self._eval(node[2], src)
            if not (isinstance(a, Tensor) and isinstance(b, Tensor)):
                raise ParseError("'^' between non-integers needs two forms", node[3], src)
            return wedge(a, b)
        if kind == "bin":
            _, op, a, b = node
            x, y = self._eval(a, src), self._eval(b, src)
            return _binary(op, x, y, src)
        raise AssertionError(kind)


def _binary(op, x, y, src):
    xt, yt = isinstance(x, Tensor), isinstance(y, Tensor)
    if op in "+-":
        if xt != yt:
            raise ParseError(f"cannot {'add' if op == '+' else 'subtract'} a scalar and a tensor", -1, src)
        return x + y if op == "+" else x - y
    if op == "*":
        if xt and yt:
            return tensor_product(x, y)
        if xt:
            return x.scale(y)
        if yt:
            return y.scale(x)
        return x * y
    if op == "/":
        if yt:
            raise ParseError("cannot divide by a tensor", -1, src)
        if y.is_zero():
            raise ExprError("division by zero")
        return x.scale(1 / y) if xt else x / y
    if not (xt and yt):
        raise ParseError(f"operator {op!r} needs tensor operands", -1, src)
    return tensor_product(x, y) if op == "&" else sym_product(x, y)
