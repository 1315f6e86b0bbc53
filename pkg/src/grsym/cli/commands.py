"""Command handlers for the script DSL.

Each handler receives the session, the positional arguments and the option
map, and returns ``(result, trace)`` where ``result`` is built from plain
strings, lists and dicts so that both output formats serialize it directly.
"""

from __future__ import annotations

from typing import Callable

from .. import curvature, invariants, liealg, newman_penrose as np_, spinor
from ..invariants import AnsatzBasis, CoordinateMap
from ..manifold import DOWN, T, UP, Metric, Tensor
from .dsl import ScriptError, Statement
from .session import Record, Session


# options that take no value
FLAGS = {"--no-closure", "--pnd"}


def parse_arguments(text: str, line: int) -> tuple[list[str], dict[str, str]]:
    """Positional words, then ``--option value`` pairs (a value runs to the next option)."""
    words = _words(text)
    args: list[str] = []
    opts: dict[str, str] = {}
    i = 0
    while i < len(words) and not words[i].startswith("--"):
        args.append(words[i])
        i += 1
    while i < len(words):
        key = words[i]
        if not key.startswith("--"):
            raise ScriptError(f"unexpected argument {key!r} after options", line)
        i += 1
        val = []
        while i < len(words) and not words[i].startswith("--"):
            val.append(words[i])
            i += 1
        if key in FLAGS:
            if val:
                raise ScriptError(f"{key} takes no value", line)
            opts[key] = "true"
        else:
            if not val:
                raise ScriptError(f"{key} needs a value", line)
            opts[key] = " ".join(val)
    return args, opts


def _words(text: str) -> list[str]:
    out, cur, depth = [], [], 0
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


# --------------------------------------------------------------------------
# result shaping
# --------------------------------------------------------------------------

def tensor_result(t: Tensor) -> dict[str, str]:
    return t.components_text()


def space_result(fields) -> dict:
    return {"dimension": len(fields), "fields": [tensor_result(f) for f in fields]}


class _Ctx:
    def __init__(self, session: Session, args, opts, line):
        self.s, self.args, self.opts, self.line = session, args, opts, line

    def need(self, n: int, usage: str):
        if len(self.args) != n:
            raise ScriptError(f"usage: {usage}", self.line)

    def metric(self, name: str) -> Metric:
        return self.s.get(name, Metric, self.line, "metric")

    def tensors(self, name: str) -> list[Tensor]:
        v = self.s.get(name, None, self.line, "tensor list")
        if isinstance(v, Tensor):
            return [v]
        if isinstance(v, list) and v and all(isinstance(t, Tensor) for t in v):
            return v
        raise ScriptError(f"{name!r} is not a list of tensors", self.line)

    def tensor(self, name_or_expr: str) -> Tensor:
        v = self.s.expr(name_or_expr, self.line)
        if not isinstance(v, Tensor):
            raise ScriptError(f"{name_or_expr!r} is not a tensor", self.line)
        return v

    def ansatz(self, required: bool = False) -> AnsatzBasis | None:
        name = self.opts.get("--ansatz")
        if name is None:
            if required:
                raise ScriptError("this command needs --ansatz <name>", self.line)
            return None
        return self.s.get(name, AnsatzBasis, self.line, "ansatz")

    def at(self, required: bool = False):
        text = self.opts.get("--at")
        if text is None:
            if required:
                raise ScriptError("this command needs --at <point>", self.line)
            return None
        return self.s.point(text, self.line)

    @property
    def closure(self) -> bool:
        return "--no-closure" not in self.opts

    def rank(self, text: str) -> int:
        if not text.isdigit() or int(text) < 1:
            raise ScriptError(f"rank must be a positive integer, got {text!r}", self.line)
        return int(text)

    def store(self, value):
        name = self.opts.get("--as")
        if name is not None:
            self.s.bind(name, value, self.line)

    def tetrad(self, g: Metric):
        name = self.opts.get("--tetrad")
        return self.tensors(name) if name else np_.tetrad_from_metric(g)


# --------------------------------------------------------------------------
# handlers
# --------------------------------------------------------------------------

def _petrov(c: _Ctx):
    c.need(1, "petrov <metric> [--tetrad T] [--at point]")
    g = c.metric(c.args[0])
    res = np_.petrov_type(g, c.tetrad(g) if "--tetrad" in c.opts else None, c.at())
    return {"type": res.label}, res.trace


def _np_scalars(c: _Ctx):
    c.need(1, "np-scalars <metric> [--tetrad T] [--adapted LABEL] [--pnd] [--at point]")
    g = c.metric(c.args[0])
    tet = c.tetrad(g)
    label = c.opts.get("--adapted")
    if label is not None:
        tet = np_.adapted_null_tetrad(tet, g, label)
    psi = np_.np_weyl_scalars(tet, g)
    pt = c.at()
    if pt:
        psi = psi.subs(pt)
    out: dict = {f"Psi{i}": str(p) for i, p in enumerate(psi)}
    if "--pnd" in c.opts:
        out["principal null directions"] = [tensor_result(v) for v in
                                            np_.principal_null_directions(tet, g, label)]
    c.store(tet)
    return out, None


def _curvature(c: _Ctx):
    c.need(1, "curvature <metric>")
    g = c.metric(c.args[0])
    R = curvature.riemann(g)
    Ric = curvature.ricci(g, R)
    return {"riemann": tensor_result(R), "ricci": tensor_result(Ric),
            "ricci scalar": str(curvature.ricci_scalar(g, Ric)),
            "weyl": tensor_result(curvature.weyl(g, R))}, None


def _einstein(c: _Ctx):
    c.need(1, "einstein <metric> [--lambda L]")
    g = c.metric(c.args[0])
    lam = c.opts.get("--lambda")
    if lam is None:
        return {"einstein": tensor_result(curvature.einstein(g))}, None
    res = curvature.einstein_residual(g, c.s.scalar(lam, c.line))
    return {"residual": tensor_result(res), "vanishes": res.is_zero()}, None


def _killing_vectors(c: _Ctx):
    c.need(1, "killing-vectors <metric> [--ansatz A] [--no-closure] [--as name]")
    space = invariants.killing_vectors(c.metric(c.args[0]), c.ansatz(), closure=c.closure)
    c.store(list(space.fields))
    return space_result(space.fields), None


def _homothety(c: _Ctx):
    c.need(1, "homothety <metric> [--ansatz A] [--no-closure] [--as name]")
    H, space = invariants.homothety_vectors(c.metric(c.args[0]), c.ansatz(), closure=c.closure)
    if H is not None:
        c.store(H)
    return {"homothety": tensor_result(H) if H is not None else None,
            "killing": space_result(space.fields)}, None


def _killing_tensors(c: _Ctx):
    c.need(2, "killing-tensors <metric> <rank> --ansatz A")
    space = invariants.killing_tensors(c.metric(c.args[0]), c.rank(c.args[1]), c.ansatz(True),
                                       closure=c.closure)
    c.store(list(space.fields))
    return space_result(space.fields), None


def _killing_yano(c: _Ctx):
    c.need(2, "killing-yano <metric> <rank> --ansatz A")
    space = invariants.killing_yano(c.metric(c.args[0]), c.rank(c.args[1]), c.ansatz(True),
                                    closure=c.closure)
    c.store(list(space.fields))
    return space_result(space.fields), None


_SHAPES = {
    "scalar": ((), None),
    "vector": (((T, UP),), None),
    "covector": (((T, DOWN),), None),
    "sym2": (((T, DOWN), (T, DOWN)), "symmetric"),
    "form2": (((T, DOWN), (T, DOWN)), "skew"),
}


def _invariant_fields(c: _Ctx):
    c.need(2, "invariant-fields <generators> <scalar|vector|covector|sym2|form2|tensor-list> --ansatz A")
    gens = c.tensors(c.args[0])
    shape_word = c.args[1]
    if shape_word in _SHAPES:
        shape, sym = _SHAPES[shape_word]
    else:
        shape, sym = c.tensors(shape_word), None
    space = invariants.invariant_fields(gens, shape, c.ansatz(True), symmetry=sym, closure=c.closure)
    c.store(list(space.fields))
    if shape_word == "scalar":
        return {"dimension": len(space), "functions": [str(f.value()) for f in space]}, None
    out = space_result(space.fields)
    out["pointwise generators"] = [tensor_result(t) for t in invariants.pointwise_generators(space)]
    return out, None


def _normalizer(c: _Ctx):
    c.need(1, "normalizer <generators> --ansatz A")
    space = invariants.infinitesimal_normalizer(c.tensors(c.args[0]), c.ansatz(True), closure=c.closure)
    c.store(list(space.fields))
    return space_result(space.fields), None


def _flow(c: _Ctx):
    c.need(1, "flow <vector> [--param s] [--as name]")
    phi = invariants.flow(c.tensor(c.args[0]), c.opts.get("--param", "s"))
    c.store(phi)
    return {"map": str(phi)}, None


def _pullback(c: _Ctx):
    c.need(2, "pullback <map> <tensor>")
    phi = c.s.get(c.args[0], CoordinateMap, c.line, "coordinate map")
    return tensor_result(invariants.pullback(phi, c.tensor(c.args[1]))), None


def _lie_algebra(c: _Ctx):
    c.need(1, "lie-algebra <vector fields>")
    L = liealg.lie_algebra_data(c.tensors(c.args[0]))
    c.store(L)
    return {"dimension": L.n, "brackets": [f"[{L.labels[i]}, {L.labels[j]}] = {L.format_vector(v)}"
                                           for i, j, v in L.bracket_table()]}, None


def _levi(c: _Ctx):
    c.need(1, "levi <vector fields>")
    L = liealg.lie_algebra_data(c.tensors(c.args[0]))
    R, S = liealg.levi_decomposition(L)
    return {"radical": str(R), "levi": str(S)}, None


def _isotropy(c: _Ctx):
    c.need(1, "isotropy <vector fields> --at point [--metric g]")
    fields = c.tensors(c.args[0])
    pt = c.at(True)
    L = liealg.lie_algebra_data(fields)
    vecs, rows = liealg.isotropy_subalgebra(fields, pt)
    out: dict = {"dimension": len(rows), "subalgebra": [L.format_vector(r) for r in rows]}
    if "--metric" in c.opts:
        out["type"] = liealg.isotropy_type(fields, pt, c.metric(c.opts["--metric"])).label
        if rows:
            h = liealg.Subspace(L, rows)
            fam = liealg.query_reductive_pair(h, liealg.complementary_basis(h, parametric=True))
            out["reductive"] = fam.verdict
            out["reductive free parameters"] = [p.name for p in fam.free_parameters]
    return out, None


def _isometry_dim(c: _Ctx):
    c.need(1, "isometry-dim <metric> --at point [--depth k]")
    depth = int(c.opts.get("--depth", "3"))
    kd = invariants.isometry_dimension_at_point(c.metric(c.args[0]), c.at(True), depth)
    return {"dimension": kd.dimension, "stable": kd.stable, "history": kd.history}, None


def _solder_form(c: _Ctx):
    name = c.opts.get("--tetrad") or (c.args[0] if c.args else None)
    if name is None or "--metric" not in c.opts:
        raise ScriptError("usage: <command> <orthonormal tetrad> --metric g", c.line)
    return spinor.solder_form(c.tensors(name), c.metric(c.opts["--metric"]))


def _solder(c: _Ctx):
    sf = _solder_form(c)
    return {"sigma": tensor_result(sf.sigma)}, None


def _weyl_spinor(c: _Ctx):
    W = spinor.weyl_spinor(_solder_form(c))
    c.store(W)
    return tensor_result(W), None


def _factor_weyl(c: _Ctx):
    W = spinor.weyl_spinor(_solder_form(c))
    spinors, eta = spinor.factor_weyl_spinor(W, c.opts.get("--type"), c.at())
    return {"spinors": [tensor_result(s) for s in spinors],
            "eta": None if eta is None else str(eta)}, None


COMMANDS: dict[str, Callable[[_Ctx], tuple]] = {
    "petrov": _petrov,
    "np-scalars": _np_scalars,
    "curvature": _curvature,
    "einstein": _einstein,
    "killing-vectors": _killing_vectors,
    "homothety": _homothety,
    "killing-tensors": _killing_tensors,
    "killing-yano": _killing_yano,
    "invariant-fields": _invariant_fields,
    "normalizer": _normalizer,
    "flow": _flow,
    "pullback": _pullback,
    "lie-algebra": _lie_algebra,
    "levi": _levi,
    "isotropy": _isotropy,
    "isometry-dim": _isometry_dim,
    "solder": _solder,
    "weyl-spinor": _weyl_spinor,
    "factor-weyl": _factor_weyl,
}


def run_command(session: Session, st: Statement) -> Record:
    rest = st.text[len(st.head):].strip()
    args, opts = parse_arguments(rest, st.line)
    ctx = _Ctx(session, args, opts, st.line)
    result, trace = COMMANDS[st.head](ctx)
    inputs = {"args": args, "options": opts}
    return Record(st.head, inputs, "ok", result, trace if session.trace else None)
