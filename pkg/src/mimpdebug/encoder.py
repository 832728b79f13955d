"""Trace-formula construction: one clause per statement, grown
incrementally from traces or built in one shot for the all-paths baseline.

Clause shapes:
  guard-def   guard_st <=> predicate_st
  phi-def     (guard_cs && lhs==rhs_t) || (!guard_cs && lhs==rhs_f)
  assign      lhs == rhs
  truncation  !loop_condition          (hard marker for a truncated loop)

Input and assertion clauses are the solver stage's job, not the encoder's.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from . import lang, ssa as ssa_mod


class EncodingError(Exception):
    pass


GUARD_DEF = "guard-def"
PHI_DEF = "phi-def"
ASSIGN = "assign"
INPUT = "input"
ASSERTION = "assertion"
TRUNCATION = "truncation"


@dataclass(frozen=True)
class Clause:
    id: int
    kind: str
    constraint: object  # boolean expression
    origin: object  # statement label, or "input"/"assert"
    hard: bool
    weight: object = None  # Fraction, TOP sentinel, or None
    concretized: bool = False

    def __str__(self):
        h = "hard" if self.hard else "soft"
        w = "" if self.weight is None else f" w={self.weight}"
        return (f"[{self.id}] {h}{w} {self.kind} @{self.origin}: "
                f"{lang.expr_to_str(self.constraint)}")


@dataclass
class TraceFormula:
    clauses: dict = field(default_factory=dict)  # id -> Clause, insertion order
    clause_origin: dict = field(default_factory=dict)  # id -> statement label
    sp: set = field(default_factory=set)  # statement labels encoded
    _next_id: int = 1

    def add(self, kind, constraint, origin, hard):
        cid = self._next_id
        self._next_id += 1
        cl = Clause(id=cid, kind=kind, constraint=constraint,
                    origin=origin, hard=hard)
        self.clauses[cid] = cl
        self.clause_origin[cid] = origin
        return cl

    def statement_clauses(self):
        return [c for c in self.clauses.values()
                if c.kind in (GUARD_DEF, PHI_DEF, ASSIGN)]

    def copy(self):
        tf = TraceFormula()
        tf.clauses = dict(self.clauses)
        tf.clause_origin = dict(self.clause_origin)
        tf.sp = set(self.sp)
        tf._next_id = self._next_id
        return tf


def clause_for(stmt, ssa):
    """Build the clause for one SSA statement, or None for statements the
    encoder does not model (asserts)."""
    if isinstance(stmt, ssa_mod.SsaCond):
        return (GUARD_DEF, lang.Iff(lang.GuardVar(stmt.guard), stmt.pred))
    if isinstance(stmt, ssa_mod.SsaPhi):
        g = lang.GuardVar(stmt.guard)
        sel_t = lang.BoolOp("&&", g,
                            lang.Cmp("==", lang.Var(stmt.lhs),
                                     lang.Var(stmt.rhs_true)))
        sel_f = lang.BoolOp("&&", lang.Not(g),
                            lang.Cmp("==", lang.Var(stmt.lhs),
                                     lang.Var(stmt.rhs_false)))
        return (PHI_DEF, lang.BoolOp("||", sel_t, sel_f))
    if isinstance(stmt, ssa_mod.SsaAssign):
        return (ASSIGN, lang.Cmp("==", lang.Var(stmt.lhs), stmt.rhs))
    if isinstance(stmt, ssa_mod.SsaTrunc):
        return (TRUNCATION, lang.Not(stmt.pred))
    if isinstance(stmt, ssa_mod.SsaAssert):
        return None
    raise EncodingError(f"statement kind {type(stmt).__name__} not encodable")


def formula_generator(new_trace, tf, ssa):
    """Extend `tf` with clauses for every statement of `new_trace` not yet
    in scope; statements already encoded are skipped. Returns `tf`."""
    for label in new_trace.steps:
        if label in tf.sp:
            continue
        stmt = ssa.stmts.get(label)
        if stmt is None:
            raise EncodingError(f"trace step {label!r} not in SSA program")
        built = clause_for(stmt, ssa)
        tf.sp.add(label)
        if built is None:
            continue
        kind, constraint = built
        # phi clauses stay hard downstream; hardness is the solver's call,
        # recorded when the instance is assembled
        tf.add(kind, constraint, label, hard=(kind in (PHI_DEF, TRUNCATION)))
    return tf


def encode_all_paths(ssa, max_clauses=100_000):
    """All-paths baseline: one clause per statement of the fully unrolled
    program, every branch side included."""
    if ssa.needs_unroll:
        raise EncodingError("SSA program contains loops; unroll first")
    tf = TraceFormula()

    def walk(body):
        for st in body:
            if isinstance(st, ssa_mod.SsaCond):
                _emit(st)
                walk(st.then_body)
                walk(st.else_body)
                for phi in st.phis:
                    _emit(phi)
            else:
                _emit(st)

    def _emit(st):
        if st.label in tf.sp:
            return
        built = clause_for(st, ssa)
        tf.sp.add(st.label)
        if built is None:
            return
        kind, constraint = built
        tf.add(kind, constraint, st.label, hard=(kind in (PHI_DEF, TRUNCATION)))
        if len(tf.clauses) > max_clauses:
            raise EncodingError(
                f"all-paths formula exceeds {max_clauses} clauses (blow-up)")

    walk(ssa.body)
    return tf


# ---------------------------------------------------------------------------
# Concretization

def concretize(clause, values, policy="nonlinear-mul"):
    """Replace selected symbolic operands with their logged concrete values.

    The default policy rewrites only multiplications between two variables
    (the nonlinear case), substituting the right operand. Concretized
    clauses are flagged; reports surface the potential unsoundness.
    """
    changed = [False]

    def subst_var(v):
        if v.name not in values:
            raise EncodingError(f"no logged value for {v.name!r}")
        changed[0] = True
        return lang.Num(values[v.name])

    def walk(e):
        if isinstance(e, lang.BinOp):
            left, right = walk(e.left), walk(e.right)
            if (e.op == "*" and policy == "nonlinear-mul"
                    and isinstance(left, lang.Var) and isinstance(right, lang.Var)):
                right = subst_var(right)
            return lang.BinOp(e.op, left, right)
        if isinstance(e, lang.Cmp):
            return lang.Cmp(e.op, walk(e.left), walk(e.right))
        if isinstance(e, lang.BoolOp):
            return lang.BoolOp(e.op, walk(e.left), walk(e.right))
        if isinstance(e, lang.Iff):
            return lang.Iff(walk(e.left), walk(e.right))
        if isinstance(e, lang.Not):
            return lang.Not(walk(e.arg))
        if policy == "all" and isinstance(e, lang.Var):
            return subst_var(e)
        return e

    constraint = clause.constraint
    if (isinstance(constraint, lang.Cmp) and constraint.op == "=="
            and isinstance(constraint.left, lang.Var)):
        # defining equality: the defined variable stays symbolic
        new_constraint = lang.Cmp("==", constraint.left,
                                  walk(constraint.right))
    else:
        new_constraint = walk(constraint)
    if not changed[0]:
        return clause
    return replace(clause, constraint=new_constraint, concretized=True)


# ---------------------------------------------------------------------------
# Textual dump (one clause per line; also the instance exchange format)

def clause_to_line(clause):
    return "\t".join([
        str(clause.id),
        "hard" if clause.hard else "soft",
        "-" if clause.weight is None else str(clause.weight),
        str(clause.origin),
        clause.kind,
        expr_to_sexp(clause.constraint),
    ])


def clause_from_line(line):
    from fractions import Fraction
    from .weights import TOP

    cid, hardness, weight, origin, kind, sexp = line.rstrip("\n").split("\t")
    if weight == "-":
        w = None
    elif weight == "top":
        w = TOP
    else:
        w = Fraction(weight)
    return Clause(id=int(cid), kind=kind, constraint=sexp_to_expr(sexp),
                  origin=origin, hard=(hardness == "hard"), weight=w)


def formula_to_text(tf):
    return "".join(clause_to_line(c) + "\n" for c in tf.clauses.values())


# ---------------------------------------------------------------------------
# S-expression serialization of constraints

def expr_to_sexp(e):
    if isinstance(e, lang.Num):
        return str(e.value)
    if isinstance(e, lang.Var):
        return e.name
    if isinstance(e, lang.GuardVar):
        return f"(guard {e.name})"
    if isinstance(e, lang.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, lang.BinOp):
        return f"({e.op} {expr_to_sexp(e.left)} {expr_to_sexp(e.right)})"
    if isinstance(e, lang.Cmp):
        return f"({e.op} {expr_to_sexp(e.left)} {expr_to_sexp(e.right)})"
    if isinstance(e, lang.BoolOp):
        op = "and" if e.op == "&&" else "or"
        return f"({op} {expr_to_sexp(e.left)} {expr_to_sexp(e.right)})"
    if isinstance(e, lang.Not):
        return f"(not {expr_to_sexp(e.arg)})"
    if isinstance(e, lang.Iff):
        return f"(iff {expr_to_sexp(e.left)} {expr_to_sexp(e.right)})"
    raise EncodingError(f"cannot serialize {e!r}")


def sexp_to_expr(text):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = [0]

    def parse():
        tok = tokens[pos[0]]
        pos[0] += 1
        if tok == "(":
            head = tokens[pos[0]]
            pos[0] += 1
            args = []
            while tokens[pos[0]] != ")":
                args.append(parse())
            pos[0] += 1  # consume ')'
            return _sexp_node(head, args)
        if tok == ")":
            raise EncodingError("unbalanced s-expression")
        if re.fullmatch(r"-?\d+", tok):
            return lang.Num(int(tok))
        if tok == "true":
            return lang.BoolLit(True)
        if tok == "false":
            return lang.BoolLit(False)
        return lang.Var(tok)

    out = parse()
    if pos[0] != len(tokens):
        raise EncodingError("trailing tokens in s-expression")
    return out


def _sexp_node(head, args):
    if head == "guard":
        return lang.GuardVar(args[0].name)
    if head in ("+", "-", "*"):
        return lang.BinOp(head, args[0], args[1])
    if head in lang.CMP_OPS:
        return lang.Cmp(head, args[0], args[1])
    if head == "and":
        return lang.BoolOp("&&", args[0], args[1])
    if head == "or":
        return lang.BoolOp("||", args[0], args[1])
    if head == "not":
        return lang.Not(args[0])
    if head == "iff":
        return lang.Iff(args[0], args[1])
    raise EncodingError(f"unknown s-expression head {head!r}")
