"""SSA transformation: version variables, insert phi pseudo-statements at
conditional joins, and unroll loops to a bounded depth.

SSA statement labels are strings: base statements keep their (stringified)
line number, replica k of an unrolled loop body line l is "l@k", and phi
pseudo-statements are numbered "phi1", "phi2", ... in creation order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import lang
from .lang import BinOp, Num, Var, rename_vars


class SsaError(Exception):
    pass


@dataclass
class SsaAssign:
    label: str
    lhs: str
    rhs: object  # expression over SSA variables


@dataclass
class SsaCond:
    label: str
    guard: str
    pred: object
    then_body: list
    else_body: list
    phis: list  # SsaPhi at this conditional's join


@dataclass
class SsaPhi:
    label: str  # "phiN"
    lhs: str
    cond_label: str
    guard: str
    rhs_true: str
    rhs_false: str


@dataclass
class SsaAssert:
    label: str
    pred: object


@dataclass
class SsaTrunc:
    """Loop-truncation marker: reached when the unroll bound is exhausted
    while the loop condition still holds."""

    label: str
    loop_label: str
    pred: object  # loop condition over SSA variables at that point


@dataclass
class _UnrolledWhile:
    """Internal pre-SSA node produced by loop unrolling."""

    label: str
    cond: object
    then_body: list
    else_body: list


@dataclass
class SsaProgram:
    source: lang.MiniImpProgram
    params: list = field(default_factory=list)  # SSA names, version 1
    param_map: dict = field(default_factory=dict)  # original -> SSA name
    body: list = field(default_factory=list)
    stmts: dict = field(default_factory=dict)  # label -> statement
    guards: dict = field(default_factory=dict)  # conditional label -> guard name
    orig_of: dict = field(default_factory=dict)  # SSA var -> (original, version)
    needs_unroll: bool = False
    unroll_bound: int = None

    def assert_stmt(self):
        for st in self.stmts.values():
            if isinstance(st, SsaAssert):
                return st
        raise SsaError("SSA program has no assert")

    def base_label(self, label):
        """Map an SSA label back to the original source line (int)."""
        label = str(label)
        if label.startswith("phi"):
            return base_label(self.stmts[label].cond_label)
        return base_label(label)

    def source_text(self, label):
        base = self.base_label(label)
        st = self.source.stmts.get(base)
        if st is None:
            return ""
        if isinstance(st, lang.Assign):
            return f"{st.target} = {lang.expr_to_str(st.value)}"
        if isinstance(st, (lang.If, lang.While)):
            kw = "if" if isinstance(st, lang.If) else "while"
            return f"{kw} {lang.expr_to_str(st.cond)}"
        if isinstance(st, lang.Assert):
            return f"assert {lang.expr_to_str(st.cond)}"
        return ""


def base_label(label):
    """Strip replica/truncation decorations: "5@2" -> 5, "5!" -> 5."""
    m = re.match(r"^(\d+)", str(label))
    if not m:
        raise ValueError(f"label {label!r} has no base line")
    return int(m.group(1))


def to_ssa(cfg):
    """Transform a CFG into SSA form.

    Programs with loops come back flagged `needs_unroll`; call
    `unroll_loops` to materialize a loop-free SSA program.
    """
    if cfg.has_loops:
        return SsaProgram(source=cfg.program, needs_unroll=True)
    return _construct(cfg.program, _stringify_labels(cfg.program.body), bound=None)


def unroll_loops(ssa, bound):
    """Return a loop-free SSA program with each loop body replicated
    `bound` times (iterations beyond the bound hit a truncation marker)."""
    if bound < 1:
        raise ValueError("unroll bound must be >= 1")
    prog = ssa.source
    body = _unroll_body(_stringify_labels(prog.body), bound)
    return _construct(prog, body, bound=bound)


# ---------------------------------------------------------------------------
# Loop unrolling (pre-SSA, on a label-stringified copy of the AST)

def _stringify_labels(body):
    out = []
    for st in body:
        if isinstance(st, lang.Assign):
            out.append(lang.Assign(str(st.label), st.target, st.value))
        elif isinstance(st, lang.If):
            out.append(lang.If(str(st.label), st.cond,
                               _stringify_labels(st.then_body),
                               _stringify_labels(st.else_body)))
        elif isinstance(st, lang.While):
            out.append(lang.While(str(st.label), st.cond,
                                  _stringify_labels(st.body)))
        elif isinstance(st, lang.Assert):
            out.append(lang.Assert(str(st.label), st.cond))
    return out


def _suffix_labels(body, k):
    def lab(l):
        return l if k == 1 else f"{l}@{k}"

    out = []
    for st in body:
        if isinstance(st, lang.Assign):
            out.append(lang.Assign(lab(st.label), st.target, st.value))
        elif isinstance(st, lang.If):
            out.append(lang.If(lab(st.label), st.cond,
                               _suffix_labels(st.then_body, k),
                               _suffix_labels(st.else_body, k)))
        elif isinstance(st, lang.While):
            out.append(lang.While(lab(st.label), st.cond,
                                  _suffix_labels(st.body, k)))
        elif isinstance(st, lang.Assert):
            out.append(lang.Assert(lab(st.label), st.cond))
    return out


def _unroll_body(body, bound):
    out = []
    for st in body:
        if isinstance(st, lang.While):
            out.append(_unroll_while(st, bound))
        elif isinstance(st, lang.If):
            out.append(lang.If(st.label, st.cond,
                               _unroll_body(st.then_body, bound),
                               _unroll_body(st.else_body, bound)))
        else:
            out.append(st)
    return out


def _unroll_while(st, bound):
    def replica(k):
        label = st.label if k == 1 else f"{st.label}@{k}"
        body_k = _unroll_body(_suffix_labels(st.body, k), bound)
        if k < bound:
            tail = [replica(k + 1)]
        else:
            tail = [SsaTrunc(label=f"{st.label}!", loop_label=st.label,
                             pred=st.cond)]
        return _UnrolledWhile(label, st.cond, body_k + tail, [])

    return replica(1)


# ---------------------------------------------------------------------------
# SSA construction (structured, loop-free input)

def _construct(prog, body, bound):
    out = SsaProgram(source=prog, unroll_bound=bound)
    versions = {}
    counters = {"guard": 0, "phi": 0}

    def fresh(var):
        versions[var] = versions.get(var, 0) + 1
        name = f"{var}{versions[var]}"
        out.orig_of[name] = (var, versions[var])
        return name

    env = {}
    for p in prog.params:
        name = fresh(p)
        env[p] = name
        out.params.append(name)
        out.param_map[p] = name

    def register(st):
        if st.label in out.stmts:
            raise SsaError(f"duplicate SSA label {st.label}")
        out.stmts[st.label] = st

    def walk(block, env):
        result = []
        for st in block:
            if isinstance(st, lang.Assign):
                rhs = rename_vars(st.value, env)
                lhs = fresh(st.target)
                env[st.target] = lhs
                node = SsaAssign(str(st.label), lhs, rhs)
                register(node)
                result.append(node)
            elif isinstance(st, (lang.If, _UnrolledWhile)):
                pred = rename_vars(st.cond, env)
                counters["guard"] += 1
                guard = f"guard{counters['guard']}"
                t_env = dict(env)
                f_env = dict(env)
                then_body = walk(st.then_body, t_env)
                else_body = walk(st.else_body, f_env)
                phis = []
                for var in _join_candidates(st, env, t_env, f_env):
                    rt, rf = t_env.get(var), f_env.get(var)
                    if rt is None or rf is None:
                        # defined on one side only and never before: dead
                        # past the join (frontend rejects any later use)
                        env.pop(var, None)
                        continue
                    if rt == rf:
                        continue
                    lhs = fresh(var)
                    counters["phi"] += 1
                    phi = SsaPhi(label=f"phi{counters['phi']}", lhs=lhs,
                                 cond_label=str(st.label), guard=guard,
                                 rhs_true=rt, rhs_false=rf)
                    register(phi)
                    phis.append(phi)
                    env[var] = lhs
                node = SsaCond(str(st.label), guard, pred,
                               then_body, else_body, phis)
                register(node)
                out.guards[str(st.label)] = guard
                result.append(node)
            elif isinstance(st, lang.Assert):
                node = SsaAssert(str(st.label), rename_vars(st.cond, env))
                register(node)
                result.append(node)
            elif isinstance(st, SsaTrunc):
                node = SsaTrunc(st.label, st.loop_label,
                                rename_vars(st.pred, env))
                register(node)
                result.append(node)
            elif isinstance(st, lang.While):
                raise SsaError(
                    "loops must be unrolled before SSA construction; "
                    "call unroll_loops")
            else:
                raise SsaError(f"unsupported construct {type(st).__name__}")
        return result

    out.body = walk(body, env)
    return out


def _join_candidates(st, pre_env, t_env, f_env):
    """Variables needing a phi at this join, in first-definition order."""
    seen = []
    for branch_env in (t_env, f_env):
        for var in branch_env:
            if branch_env[var] != pre_env.get(var) and var not in seen:
                seen.append(var)
    return seen


# ---------------------------------------------------------------------------
# Widths

def infer_widths(ssa, width):
    """Bit-width of each SSA variable under exact (non-wrapping) arithmetic.

    Declared variables (params, and any variable left unconstrained by a
    dropped clause) range over `width`-bit signed values; derived values
    widen through the dataflow so no intermediate result ever overflows.
    """
    widths = {}
    for p in ssa.params:
        widths[p] = width

    def expr_width(e):
        if isinstance(e, Num):
            return max(e.value.bit_length() + 1, 2)
        if isinstance(e, Var):
            return widths.get(e.name, width)
        if isinstance(e, BinOp):
            wl, wr = expr_width(e.left), expr_width(e.right)
            if e.op == "*":
                w = wl + wr
            else:
                w = max(wl, wr) + 1
            if w > 256:
                raise SsaError("expression width exceeds 256 bits")
            return w
        raise SsaError(f"not an integer expression: {e!r}")

    def walk(body):
        for st in body:
            if isinstance(st, SsaAssign):
                widths[st.lhs] = max(width, expr_width(st.rhs))
            elif isinstance(st, SsaCond):
                walk(st.then_body)
                walk(st.else_body)
                for phi in st.phis:
                    widths[phi.lhs] = max(widths.get(phi.rhs_true, width),
                                          widths.get(phi.rhs_false, width))

    walk(ssa.body)
    return widths


# ---------------------------------------------------------------------------
# Debug dump

def ssa_to_text(ssa):
    """Textual SSA dump: one statement per line, paper-figure style."""
    lines = [f"prog {ssa.source.name}({', '.join(ssa.params)})"]

    def emit(body, indent):
        pad = "  " * indent
        for st in body:
            if isinstance(st, SsaAssign):
                lines.append(f"{pad}{st.label:>6}.  {st.lhs} = "
                             f"{lang.expr_to_str(st.rhs)}")
            elif isinstance(st, SsaCond):
                lines.append(f"{pad}{st.label:>6}.  if {lang.expr_to_str(st.pred)}"
                             f"   [{st.guard}]")
                emit(st.then_body, indent + 1)
                if st.else_body:
                    lines.append(f"{pad}        else")
                    emit(st.else_body, indent + 1)
                for phi in st.phis:
                    lines.append(f"{pad}{phi.label:>6}.  {phi.lhs} = "
                                 f"phi({phi.rhs_true}, {phi.rhs_false})"
                                 f"   [{st.label}]")
            elif isinstance(st, SsaAssert):
                lines.append(f"{pad}{st.label:>6}.  assert "
                             f"{lang.expr_to_str(st.pred)}")
            elif isinstance(st, SsaTrunc):
                lines.append(f"{pad}{st.label:>6}.  truncate-if "
                             f"{lang.expr_to_str(st.pred)}")

    if ssa.needs_unroll:
        lines.append("  <contains loops: unroll before use>")
    else:
        emit(ssa.body, 0)
    return "\n".join(lines) + "\n"
