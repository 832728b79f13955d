"""Concrete execution of MiniImp programs and their SSA forms.

Two interpreters live here on purpose: `run_program` walks the original
AST (used for golden runs, coverage, and as an independent oracle), while
`execute` walks the loop-free SSA form and produces the traces the encoder
consumes. `execute_hijacked` replays a previous trace's branch decisions up
to a chosen conditional and forces the alternative branch there.

Arithmetic is exact (arbitrary-precision integers, no wraparound); the
solver encodes the same semantics bit-precisely, so formulas and concrete
runs always agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lang, ssa as ssa_mod
from .cfg import Branch
from .lang import BinOp, BoolLit, BoolOp, Cmp, Iff, Not, Num, Var, GuardVar


class InterpError(Exception):
    pass


class HijackError(InterpError):
    """flip_br's conditional does not occur in the old trace."""


PASSED = "passed"
VIOLATED = "violated"
TRUNCATED = "truncated"

_STEP_CAP = 1_000_000


def eval_expr(e, env):
    """Evaluate an expression under exact integer semantics.

    `env` maps variable names to ints and guard names to bools.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name not in env:
            raise InterpError(f"variable {e.name!r} has no value")
        return env[e.name]
    if isinstance(e, GuardVar):
        if e.name not in env:
            raise InterpError(f"guard {e.name!r} has no value")
        return env[e.name]
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, BinOp):
        a, b = eval_expr(e.left, env), eval_expr(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        raise InterpError(f"unknown operator {e.op!r}")
    if isinstance(e, Cmp):
        a, b = eval_expr(e.left, env), eval_expr(e.right, env)
        return {"==": a == b, "!=": a != b, "<": a < b,
                "<=": a <= b, ">": a > b, ">=": a >= b}[e.op]
    if isinstance(e, BoolOp):
        a = eval_expr(e.left, env)
        if e.op == "&&":
            return bool(a) and bool(eval_expr(e.right, env))
        return bool(a) or bool(eval_expr(e.right, env))
    if isinstance(e, Not):
        return not eval_expr(e.arg, env)
    if isinstance(e, Iff):
        return bool(eval_expr(e.left, env)) == bool(eval_expr(e.right, env))
    raise InterpError(f"cannot evaluate {e!r}")


# ---------------------------------------------------------------------------
# Original-program interpreter (oracle / golden / coverage)

@dataclass
class RunResult:
    env: dict
    assert_ok: bool
    covered_stmts: set = field(default_factory=set)
    covered_branches: set = field(default_factory=set)


def run_program(prog, inputs, step_cap=_STEP_CAP):
    """Execute the original (un-SSA'd) program; loops run natively."""
    env = {}
    for p in prog.params:
        if p not in inputs:
            raise InterpError(f"missing input for parameter {p!r}")
        env[p] = int(inputs[p])
    res = RunResult(env=env, assert_ok=True)
    steps = [0]

    def tick():
        steps[0] += 1
        if steps[0] > step_cap:
            raise InterpError("step cap exceeded (non-terminating loop?)")

    def run_block(body):
        for st in body:
            tick()
            res.covered_stmts.add(st.label)
            if isinstance(st, lang.Assign):
                env[st.target] = eval_expr(st.value, env)
            elif isinstance(st, lang.If):
                taken = bool(eval_expr(st.cond, env))
                res.covered_branches.add((st.label, taken))
                run_block(st.then_body if taken else st.else_body)
            elif isinstance(st, lang.While):
                while bool(eval_expr(st.cond, env)):
                    tick()
                    res.covered_branches.add((st.label, True))
                    run_block(st.body)
                res.covered_branches.add((st.label, False))
            elif isinstance(st, lang.Assert):
                res.assert_ok = bool(eval_expr(st.cond, env))

    run_block(prog.body)
    return res


# ---------------------------------------------------------------------------
# SSA traces

@dataclass
class Trace:
    steps: list  # executed statement labels, phi pseudo-labels included
    decisions: list  # (conditional label, polarity taken), in order
    values: dict  # SSA variable -> value (variables defined in this run)
    guards: dict  # guard name -> bool
    covered_branches: set  # set of Branch
    verdict: str
    flip_index: int = None  # decision index where hijack flipped, if any

    @property
    def passed(self):
        return self.verdict == PASSED


class VisitedBranches:
    """First-covering-trace map: entries are never overwritten."""

    def __init__(self):
        self._map = {}

    def insert(self, branch, trace):
        if branch not in self._map:
            self._map[branch] = trace

    def get(self, branch):
        return self._map.get(branch)

    def __contains__(self, branch):
        return branch in self._map

    def branches(self):
        return set(self._map)

    def __len__(self):
        return len(self._map)


def execute(program, inputs):
    """Run the loop-free SSA program on concrete inputs and record a trace."""
    return _run_ssa(program, inputs, forced=None, flip_at=None, flip_pol=None)


def execute_hijacked(program, inputs, old_trace, flip_br):
    """Replay `old_trace`'s branch decisions up to the first occurrence of
    flip_br's conditional, take `flip_br` there regardless of the concrete
    predicate value, then continue natively."""
    flip_at = None
    for i, (cond, _pol) in enumerate(old_trace.decisions):
        if cond == flip_br.cond:
            flip_at = i
            break
    if flip_at is None:
        raise HijackError(
            f"conditional {flip_br.cond!r} does not occur in old trace")
    return _run_ssa(program, inputs,
                    forced=[pol for _c, pol in old_trace.decisions],
                    flip_at=flip_at, flip_pol=flip_br.polarity)


def _run_ssa(program, inputs, forced, flip_at, flip_pol):
    if program.needs_unroll:
        raise InterpError("SSA program contains loops; unroll before execution")
    env = {}
    for orig, ssa_name in program.param_map.items():
        if orig not in inputs:
            raise InterpError(f"missing input for parameter {orig!r}")
        env[ssa_name] = int(inputs[orig])

    trace = Trace(steps=[], decisions=[], values=dict(env), guards={},
                  covered_branches=set(), verdict=PASSED)
    decision_no = [0]
    stop = [False]

    def take_branch(st, concrete):
        """Decide a conditional's polarity: replayed, flipped, or native."""
        i = decision_no[0]
        decision_no[0] += 1
        if flip_at is None:
            return concrete
        if i < flip_at:
            return forced[i]
        if i == flip_at:
            trace.flip_index = i
            return flip_pol
        return concrete

    def run_block(body):
        for st in body:
            if stop[0]:
                return
            if isinstance(st, ssa_mod.SsaAssign):
                val = eval_expr(st.rhs, env)
                env[st.lhs] = val
                trace.values[st.lhs] = val
                trace.steps.append(st.label)
            elif isinstance(st, ssa_mod.SsaCond):
                concrete = bool(eval_expr(st.pred, env))
                taken = take_branch(st, concrete)
                trace.steps.append(st.label)
                trace.decisions.append((st.label, taken))
                trace.guards[st.guard] = taken
                env[st.guard] = taken
                br = _branch_of(program, st, taken)
                trace.covered_branches.add(br)
                run_block(st.then_body if taken else st.else_body)
                if stop[0]:
                    return
                for phi in st.phis:
                    src = phi.rhs_true if taken else phi.rhs_false
                    if src not in env:
                        raise InterpError(
                            f"phi {phi.label} selects undefined {src!r}")
                    env[phi.lhs] = env[src]
                    trace.values[phi.lhs] = env[src]
                    trace.steps.append(phi.label)
            elif isinstance(st, ssa_mod.SsaAssert):
                trace.steps.append(st.label)
                ok = bool(eval_expr(st.pred, env))
                trace.verdict = PASSED if ok else VIOLATED
            elif isinstance(st, ssa_mod.SsaTrunc):
                if bool(eval_expr(st.pred, env)):
                    trace.steps.append(st.label)
                    trace.verdict = TRUNCATED
                    stop[0] = True
                    return

    run_block(program.body)
    return trace


def _branch_of(program, cond_stmt, polarity):
    target = None
    body = cond_stmt.then_body if polarity else cond_stmt.else_body
    if body:
        target = body[0].label
    return Branch(cond_stmt.label, polarity, target)


def trace_generator(inputs, visited, flip_br, program):
    """One round of trace generation: plain execution on the first call,
    hijacked execution afterwards; newly covered branches are recorded in
    `visited` (first-covering trace wins)."""
    if flip_br is None:
        new_trace = execute(program, inputs)
    else:
        old_trace = visited.get(flip_br)
        if old_trace is None:
            # flip_br is the branch to take; the trace that reached its
            # conditional covered the sibling branch
            sibling = Branch(flip_br.cond, not flip_br.polarity)
            old_trace = visited.get(sibling)
        if old_trace is None:
            raise HijackError(
                f"no visited trace reaches conditional {flip_br.cond!r}")
        new_trace = execute_hijacked(program, inputs, old_trace, flip_br)
    for br in new_trace.covered_branches:
        visited.insert(br, new_trace)
    return new_trace


def trace_to_text(trace, program=None):
    """One step per line: label, defined variable, value."""
    out = [f"# verdict: {trace.verdict}"]
    for step in trace.steps:
        var = val = ""
        if program is not None:
            st = program.stmts.get(step)
            if isinstance(st, (ssa_mod.SsaAssign, ssa_mod.SsaPhi)):
                var = st.lhs
                val = str(trace.values.get(st.lhs, ""))
            elif isinstance(st, ssa_mod.SsaCond):
                var = st.guard
                val = str(trace.guards.get(st.guard, ""))
        out.append("\t".join([str(step), var, val]).rstrip())
    return "\n".join(out) + "\n"
