"""Script sessions: declarations, named objects and the command report."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from ..expr import core
from ..expr.core import Atom, Expr, ExprError, UnsupportedError
from ..expr.parser import ParseError
from ..invariants import AnsatzBasis, CoordinateMap, default_ansatz
from ..manifold import Frame, GeometryError, Metric, Tensor, dgsetup
from .dsl import Evaluator, ScriptError, Statement, split_statements, split_top

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")

EXIT_OK, EXIT_PARSE, EXIT_COMPUTE, EXIT_UNSUPPORTED = 0, 2, 3, 4


@dataclass
class Record:
    command: str
    inputs: dict
    status: str
    result: Any
    trace: list | None = None

    def as_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "status": self.status,
                "result": self.result, "trace": self.trace}


@dataclass
class Report:
    records: list[Record] = field(default_factory=list)
    exit_code: int = EXIT_OK
    error: str | None = None


class Session:
    def __init__(self, trace: bool = False):
        self.frames: dict[str, Frame] = {}
        self.frame: Frame | None = None
        self.params: dict[str, Atom] = {}
        self.functions: set[str] = set()
        self.objects: dict[str, Any] = {}
        self.trace = trace

    # -- namespace ------------------------------------------------------------
    def lookup(self, name: str):
        if name in self.objects:
            return self.objects[name]
        if name in self.params:
            return self.params[name]
        if self.frame is not None:
            for c in self.frame.coords:
                if c.name == name:
                    return c
        return None

    def evaluator(self) -> Evaluator:
        return Evaluator(self.lookup, self.frame, self.functions)

    def expr(self, text: str, line: int):
        return self.evaluator().evaluate(text, line)

    def scalar(self, text: str, line: int) -> Expr:
        v = self.expr(text, line)
        if not isinstance(v, Expr):
            raise ScriptError(f"expected a scalar, got a tensor: {text}", line)
        return v

    def get(self, name: str, kind, line: int, what: str):
        v = self.objects.get(name)
        if v is None:
            raise ScriptError(f"undeclared {what} {name!r}", line)
        if kind is not None and not isinstance(v, kind):
            raise ScriptError(f"{name!r} is not a {what}", line)
        return v

    def bind(self, name: str, value, line: int):
        if not _NAME.match(name):
            raise ScriptError(f"invalid name {name!r}", line)
        if name in self.params or name in self.frames or (
                self.frame is not None and any(c.name == name for c in self.frame.coords)):
            raise ScriptError(f"name {name!r} is already declared", line)
        self.objects[name] = value

    def point(self, text: str, line: int) -> dict[Atom, Expr]:
        out = {}
        for part in split_top(text):
            if "=" not in part:
                raise ScriptError(f"point entries look like name=value, got {part!r}", line)
            k, v = (s.strip() for s in part.split("=", 1))
            atom = self.lookup(k)
            if not isinstance(atom, Atom):
                raise ScriptError(f"{k!r} is not a coordinate or parameter", line)
            out[atom] = self.scalar(v, line)
        return out

    # -- declarations -----------------------------------------------------------
    def declare(self, st: Statement):
        head = st.head
        rest = st.text[len(head):].strip()
        handler = getattr(self, f"_st_{head}", None)
        if handler is None:
            raise ScriptError(f"unknown statement {head!r}", st.line)
        handler(rest, st.line)

    def _st_chart(self, rest: str, line: int):
        words = rest.split()
        if len(words) < 3 or words[1] != "coords":
            raise ScriptError("usage: chart <name> coords <c1> <c2> ... [pair a b] [spinors z1 z2 w1 w2]", line)
        name = words[0]
        coords, pairing, spinors = [], {}, None
        i = 2
        while i < len(words) and words[i] not in ("pair", "spinors"):
            coords.append(words[i])
            i += 1
        while i < len(words):
            if words[i] == "pair" and i + 2 < len(words):
                pairing[words[i + 1]] = words[i + 2]
                i += 3
            elif words[i] == "spinors" and i + 4 < len(words):
                spinors = words[i + 1:i + 5]
                i += 5
            else:
                raise ScriptError(f"unexpected {words[i]!r} in chart declaration", line)
        for c in coords:
            if not _NAME.match(c) or c == "I":
                raise ScriptError(f"invalid coordinate name {c!r}", line)
            if c in self.params or c in self.objects:
                raise ScriptError(f"name {c!r} is already declared", line)
        try:
            frame = dgsetup(coords, name, spinor_labels=spinors, pairing=pairing)
        except GeometryError as e:
            raise ScriptError(str(e), line) from e
        self.frames[name] = frame
        self.frame = frame

    def _st_param(self, rest: str, line: int):
        words = rest.split()
        flags = {w for w in words if w in ("real", "positive", "complex")}
        names = [w for w in words if w not in flags]
        if not names:
            raise ScriptError("usage: param <name> ... [real] [positive] [complex]", line)
        for n in names:
            if not _NAME.match(n) or self.lookup(n) is not None or n == "I":
                raise ScriptError(f"name {n!r} is already declared or invalid", line)
            self.params[n] = core.parameter(n, real="complex" not in flags, positive="positive" in flags)

    def _st_opaque(self, rest: str, line: int):
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*(?:derivative\s+(.+))?$",
                     rest, re.S)
        if not m:
            raise ScriptError("usage: opaque <f>(<coord>) [derivative <expr>]", line)
        name, arg, deriv = m.groups()
        atom = self.lookup(arg)
        if not isinstance(atom, Atom):
            raise ScriptError(f"undeclared argument {arg!r}", line)
        self.functions.add(name)
        if deriv is not None:
            core.declare_derivative(name, atom, self.scalar(deriv, line))

    def _assignment(self, rest: str, line: int) -> tuple[str, str]:
        if "=" not in rest:
            raise ScriptError("expected '<name> = <expression>'", line)
        name, value = (s.strip() for s in rest.split("=", 1))
        return name, value

    def _list_or_expr(self, value: str, line: int):
        if value.startswith("[") and value.endswith("]"):
            return [self.expr(item, line) for item in split_top(value[1:-1])]
        return self.expr(value, line)

    def _st_let(self, rest: str, line: int):
        name, value = self._assignment(rest, line)
        self.bind(name, self._list_or_expr(value, line), line)

    _st_tetrad = _st_let

    def _st_metric(self, rest: str, line: int):
        name, value = self._assignment(rest, line)
        t = self.expr(value, line)
        if not isinstance(t, Tensor):
            raise ScriptError("a metric must be a rank-2 covariant tensor", line)
        self.bind(name, Metric(t), line)

    def _st_ansatz(self, rest: str, line: int):
        name, value = self._assignment(rest, line)
        if self.frame is None:
            raise ScriptError("declare a chart before an ansatz", line)
        coords = list(self.frame.coords)
        words = value.split()
        if value.startswith("{") and value.endswith("}"):
            fns = [self.scalar(item, line) for item in split_top(value[1:-1])]
            basis = AnsatzBasis(fns, coords)
        elif words and words[0] == "polynomial" and len(words) == 2 and words[1].isdigit():
            basis = AnsatzBasis.polynomial(coords, int(words[1]))
        elif words and words[0] == "default" and len(words) in (2, 3):
            g = self.get(words[1], Metric, line, "metric")
            deg = int(words[2]) if len(words) == 3 else 2
            basis = default_ansatz(g, deg)
        else:
            raise ScriptError("usage: ansatz <name> = {f1, f2, ...} | polynomial <deg> | default <metric> [deg]",
                              line)
        self.bind(name, basis, line)

    def _st_map(self, rest: str, line: int):
        name, value = self._assignment(rest, line)
        if not (value.startswith("{") and value.endswith("}")):
            raise ScriptError("usage: map <name> = {x = <expr>, ...}", line)
        images = {c: c.expr for c in self.frame.coords}
        for atom, e in self.point(value[1:-1], line).items():
            if atom not in images:
                raise ScriptError(f"{atom.name!r} is not a coordinate", line)
            images[atom] = e
        self.bind(name, CoordinateMap(self.frame, [images[c] for c in self.frame.coords]), line)


DECLARATIONS = {"chart", "param", "opaque", "let", "tetrad", "metric", "ansatz", "map"}


def run_script(source: str, trace: bool = False) -> Report:
    from .commands import COMMANDS, run_command
    report = Report()
    try:
        statements = split_statements(source)
    except ScriptError as e:
        report.exit_code, report.error = e.code, str(e)
        return report
    session = Session(trace)
    for st in statements:
        try:
            if st.head in DECLARATIONS:
                session.declare(st)
            elif st.head in COMMANDS:
                report.records.append(run_command(session, st))
            else:
                raise ScriptError(f"unknown statement {st.head!r}", st.line)
        except ScriptError as e:
            _fail(report, st, e.code, str(e))
            break
        except ParseError as e:
            _fail(report, st, EXIT_PARSE, f"line {st.line}: {e.bare}")
            break
        except UnsupportedError as e:
            _fail(report, st, EXIT_UNSUPPORTED, f"line {st.line}: {e}")
            break
        except (ExprError, ArithmeticError, ValueError, ZeroDivisionError) as e:
            _fail(report, st, EXIT_COMPUTE, f"line {st.line}: {e}")
            break
    return report


def _fail(report: Report, st: Statement, code: int, message: str):
    report.exit_code, report.error = code, message
    if st.head in DECLARATIONS:
        return
    report.records.append(Record(st.head, {"statement": st.text}, "error", message))


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def emit(report: Report, fmt: str = "text") -> str:
    if fmt == "json-lines":
        lines = [json.dumps(r.as_dict(), ensure_ascii=False) for r in report.records]
        if report.error and not any(r.status == "error" for r in report.records):
            lines.append(json.dumps({"command": None, "inputs": {}, "status": "error",
                                     "result": report.error, "trace": None}, ensure_ascii=False))
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out: list[str] = []
    for r in report.records:
        args = " ".join(r.inputs.get("args", [])) if "args" in r.inputs else r.inputs.get("statement", "")
        out.append(f"== {r.command} {args}".rstrip())
        if r.status != "ok":
            out.append(f"error: {r.result}")
            continue
        _text(r.result, out, "")
        if r.trace:
            out.append("trace:")
            for step in r.trace:
                out.append("  " + "; ".join(f"{k}: {v}" for k, v in step.items()))
    if report.error and not any(r.status == "error" for r in report.records):
        out.append(f"error: {report.error}")
    return "\n".join(out) + ("\n" if out else "")


def _text(value, out: list[str], indent: str):
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)):
                out.append(f"{indent}{k}:")
                _text(v, out, indent + "  ")
            else:
                out.append(f"{indent}{k}: {v}")
    elif isinstance(value, list):
        for i, v in enumerate(value):
            if isinstance(v, (dict, list)):
                out.append(f"{indent}[{i + 1}]")
                _text(v, out, indent + "  ")
            else:
                out.append(f"{indent}- {v}")
    else:
        out.append(f"{indent}{value}")
