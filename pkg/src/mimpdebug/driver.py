"""Debugging session driver: the on-demand (OFC) loop, the all-paths (BA)
baseline, and multi-failing-input report merging.

One session analyzes one failing input. Each OFC iteration generates a
trace (hijacked after the first), extends the trace formula, enumerates
CoMSSs, and expands along an unvisited branch whenever a reported clause
implicates a conditional with uncovered sides; when no such branch exists
the last iteration's CoMSSs become the report.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import encoder, interp, lang, maxsat, ssa as ssa_mod, weights as weights_mod
from .cfg import Branch
from .encoder import ASSERTION, INPUT, TraceFormula


class DriverError(Exception):
    pass


@dataclass
class DebugSession:
    program: ssa_mod.SsaProgram  # loop-free (unrolled) SSA program
    failing_input: dict
    mode: str = "ofc"  # "ofc" | "ba"
    weighted: bool = False
    susp: dict = None  # statement label -> suspiciousness (CW mode)
    width: int = 32
    max_comss_size: int = 5
    max_iters: int = 64
    max_conflicts: int = 10_000_000
    timing_repeats: int = 1  # re-run each solve, report the fastest
    keep_instances: bool = False  # attach solved instances to the report

    def __post_init__(self):
        if self.program.needs_unroll:
            raise DriverError("session requires an unrolled SSA program")
        trace = interp.execute(self.program, self.failing_input)
        if trace.verdict == interp.TRUNCATED:
            raise DriverError(
                "failing input exceeds the unroll bound; raise --unroll")
        if trace.verdict != interp.VIOLATED:
            raise DriverError(
                "input does not violate the assertion; nothing to debug")
        if self.weighted and self.susp is None:
            raise DriverError("clause weighting requires a suspiciousness map")


@dataclass
class ReportEntry:
    rank: int  # 1-based; meaningful ordering only in weighted mode
    statements: list  # (base label, source text)
    clauses: list  # (clause id, origin label, constraint text)


@dataclass
class FaultReport:
    entries: list
    mode: str
    ordered: bool  # weighted reports are ranked; plain ones are sets
    metadata: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    instances: list = field(default=None, repr=False)  # kept on request

    def entity_labels(self):
        out = set()
        for e in self.entries:
            out |= {s for s, _txt in e.statements}
        return out

    def entity_rank(self, label):
        """Rank of an entity: first entry containing it (1-based)."""
        for e in self.entries:
            if label in {s for s, _ in e.statements}:
                return e.rank
        return None

    def examination_cost(self):
        """Expected lines examined: rank of... in plain mode, half the
        size of the reported entity set."""
        n = len(self.entity_labels())
        return Fraction(n, 2)

    def to_text(self):
        lines = [f"mode: {self.mode}"
                 + ("" if self.ordered else " (entries unordered)")]
        for note in self.notes:
            lines.append(f"note: {note}")
        for key in sorted(self.metadata):
            if key.endswith("_s") or key.endswith("times"):
                continue
            lines.append(f"{key}: {self.metadata[key]}")
        lines.append("rank\tlocation\tstatement")
        for e in self.entries:
            for (label, text), (cid, origin, cons) in zip(e.statements, e.clauses):
                lines.append(f"{e.rank}\tline {label}\t{text}\t[{cons}]")
        return "\n".join(lines) + "\n"

    def to_json(self, include_timing=False):
        meta = {k: v for k, v in self.metadata.items()
                if include_timing or not (k.endswith("_s") or k.endswith("times"))}
        doc = {
            "mode": self.mode,
            "ordered": self.ordered,
            "notes": list(self.notes),
            "metadata": meta,
            "entries": [
                {
                    "rank": e.rank,
                    "statements": [{"line": s, "text": t}
                                   for s, t in e.statements],
                    "clauses": [{"id": cid, "origin": str(origin),
                                 "constraint": cons}
                                for cid, origin, cons in e.clauses],
                }
                for e in self.entries
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=str)


# ---------------------------------------------------------------------------
# Instance assembly

def build_instance(tf, session):
    """pMAX-SAT (or wpMAX-SAT) instance: failing-input equalities and the
    assertion as hard clauses, phi/truncation clauses hard, the rest of the
    trace formula soft."""
    prog = session.program
    widths = ssa_mod.infer_widths(prog, session.width)
    universe = {name: ("int", w) for name, w in widths.items()}
    for guard in prog.guards.values():
        universe[guard] = ("bool",)

    # canonical clause order: identical clause sets yield identical CNF (and
    # solver behavior) no matter the discovery order
    ordered = sorted(tf.clauses.values(), key=lambda c: str(c.origin))
    soft = [c for c in ordered if not c.hard]
    if session.weighted:
        wmap = weights_mod.to_weights(session.susp, tf,
                                      base_label=prog.base_label)
        soft = weights_mod.apply_weights(soft, wmap)

    hard = [c for c in ordered if c.hard]
    next_id = max(tf.clauses, default=0) + 1
    for pname, sname in prog.param_map.items():
        hard.append(encoder.Clause(
            id=next_id, kind=INPUT,
            constraint=lang.Cmp("==", lang.Var(sname),
                                lang.Num(int(session.failing_input[pname]))),
            origin="input", hard=True))
        next_id += 1
    hard.append(encoder.Clause(
        id=next_id, kind=ASSERTION,
        constraint=prog.assert_stmt().pred,
        origin="assert", hard=True))

    return maxsat.MaxSatInstance(hard=hard, soft=soft, universe=universe,
                                 declared_width=session.width)


def _mode_name(session):
    return session.mode + ("+cw" if session.weighted else "")


def _make_report(comsses, tf, session, **metadata):
    ordered = session.weighted
    entries = []
    for i, comss in enumerate(comsses, start=1):
        stmts, clauses = [], []
        for cid in sorted(comss.clause_ids):
            origin = tf.clause_origin[cid]
            base = session.program.base_label(origin)
            stmts.append((base, session.program.source_text(origin)))
            clauses.append((cid, origin,
                            lang.expr_to_str(tf.clauses[cid].constraint)))
        entries.append(ReportEntry(rank=i, statements=stmts, clauses=clauses))
    report = FaultReport(entries=entries, mode=_mode_name(session),
                         ordered=ordered, metadata=metadata)
    if not getattr(comsses, "complete", True):
        report.notes.append("solver budget exhausted: report may be incomplete")
    return report


# ---------------------------------------------------------------------------
# OFC

def run_ofc(session):
    prog = session.program
    tf = TraceFormula()
    visited = interp.VisitedBranches()
    flip_br = None
    solve_times = []
    instances = []
    iterations = 0
    comsses = None
    converged = False

    while iterations < session.max_iters:
        iterations += 1
        new_trace = interp.trace_generator(
            session.failing_input, visited, flip_br, prog)
        flip_br = None
        if new_trace.verdict == interp.TRUNCATED:
            raise DriverError("trace hit the unroll bound; raise --unroll")
        tf = encoder.formula_generator(new_trace, tf, prog)

        instance = build_instance(tf, session)
        instances.append(instance)
        comsses, elapsed = _timed_enumerate(instance, session)
        solve_times.append(elapsed)

        flip_br = _next_flip_branch(comsses, tf, prog, visited)
        if flip_br is None:
            converged = True
            break

    report = _make_report(
        comsses, tf, session,
        iterations=iterations,
        paths_explored=iterations,
        total_paths=count_paths(prog),
        statement_clause_count=len(tf.statement_clauses()),
        branches_total=2 * _count_conds(prog),
        branches_visited=len(visited),
        solve_times=solve_times,
        mean_solve_time_s=sum(solve_times) / len(solve_times))
    if not converged:
        report.notes.append("iteration cap reached: analysis did not converge")
    if session.keep_instances:
        report.instances = instances
    return report


def _count_conds(prog):
    return sum(1 for st in prog.stmts.values()
               if isinstance(st, ssa_mod.SsaCond))


def _next_flip_branch(comsses, tf, prog, visited):
    """First conditional with an unvisited branch among the reported clauses
    (in CoMSS order, then clause-id order). A reported statement implicates
    itself (when it is a conditional), every conditional it is nested under,
    and every conditional whose guard predicate transitively depends on the
    variable it defines: dropping such a clause frees the guard and lets the
    correction reroute through the unencoded branch, so that branch must be
    encoded before the report can be trusted. Returns the branch to take,
    or None when converged."""
    parents = _parent_conds(prog)
    cond_deps = _cond_dependencies(prog)
    for comss in comsses:
        for cid in sorted(comss.clause_ids):
            origin = tf.clause_origin[cid]
            implicated = _implicated_conds(prog, parents, origin)
            defined = _defined_var(prog, origin)
            if defined is not None:
                implicated += [c for c, deps in cond_deps
                               if defined in deps and c not in implicated]
            for cond_label in implicated:
                stmt = prog.stmts[cond_label]
                if Branch(cond_label, True) not in visited:
                    return interp._branch_of(prog, stmt, True)
                if Branch(cond_label, False) not in visited:
                    return interp._branch_of(prog, stmt, False)
    return None


def _defined_var(prog, origin):
    st = prog.stmts.get(origin)
    if isinstance(st, (ssa_mod.SsaAssign, ssa_mod.SsaPhi)):
        return st.lhs
    return None


def _cond_dependencies(prog):
    """(conditional label, vars its guard transitively depends on), in
    label order. Dependencies follow SSA definitions, including phis."""
    defs = {}
    for st in prog.stmts.values():
        if isinstance(st, ssa_mod.SsaAssign):
            defs[st.lhs] = lang.expr_vars(st.rhs)
        elif isinstance(st, ssa_mod.SsaPhi):
            defs[st.lhs] = {st.rhs_true, st.rhs_false}

    def closure(seed):
        out, work = set(), list(seed)
        while work:
            v = work.pop()
            if v in out:
                continue
            out.add(v)
            work.extend(defs.get(v, ()))
        return out

    return [(st.label, closure(lang.expr_vars(st.pred)))
            for st in sorted(prog.stmts.values(), key=lambda s: str(s.label))
            if isinstance(st, ssa_mod.SsaCond)]


def _implicated_conds(prog, parents, origin):
    """The statement itself (if a conditional) followed by its chain of
    enclosing conditionals, innermost first."""
    out = []
    if isinstance(prog.stmts.get(origin), ssa_mod.SsaCond):
        out.append(origin)
    label = origin
    while label in parents:
        label = parents[label]
        out.append(label)
    return out


def _parent_conds(prog):
    """Statement label -> label of the immediately enclosing conditional."""
    parents = {}

    def walk(body, parent):
        for st in body:
            if parent is not None:
                parents[st.label] = parent
            if isinstance(st, ssa_mod.SsaCond):
                walk(st.then_body, st.label)
                walk(st.else_body, st.label)
                for phi in st.phis:  # joins sit beside their conditional
                    if parent is not None:
                        parents[phi.label] = parent

    walk(prog.body, None)
    return parents


def count_paths(prog):
    """Complete paths through the loop-free SSA body."""

    def walk(body):
        total = 1
        for st in body:
            if isinstance(st, ssa_mod.SsaCond):
                total *= walk(st.then_body) + walk(st.else_body)
        return total

    return walk(prog.body)


# ---------------------------------------------------------------------------
# BA baseline

def _timed_enumerate(instance, session):
    """Enumerate CoMSSs; the reported time is the fastest of
    `timing_repeats` identical runs (enumeration is deterministic)."""
    best = None
    for _ in range(max(1, session.timing_repeats)):
        t0 = time.perf_counter()
        comsses = maxsat.enumerate_comss(
            instance, session.max_comss_size,
            mode="weighted" if session.weighted else "plain",
            max_conflicts=session.max_conflicts)
        elapsed = time.perf_counter() - t0
        best = elapsed if best is None else min(best, elapsed)
    return comsses, best


def run_ba(session):
    prog = session.program
    tf = encoder.encode_all_paths(prog)
    instance = build_instance(tf, session)
    comsses, solve_time = _timed_enumerate(instance, session)
    truncated = any(c.kind == encoder.TRUNCATION for c in tf.clauses.values())
    report = _make_report(
        comsses, tf, session,
        iterations=1,
        total_paths=count_paths(prog),
        statement_clause_count=len(tf.statement_clauses()),
        solve_times=[solve_time],
        mean_solve_time_s=solve_time)
    if truncated:
        report.notes.append(
            "loops truncated at the unroll bound: analysis is bounded")
    if session.keep_instances:
        report.instances = [instance]
    return report


# ---------------------------------------------------------------------------
# Multi-failing-input merge

def merge_reports(reports):
    """Keep entities present in every report, ranked by the average of
    their original ranks (ties by statement label)."""
    if not reports:
        raise DriverError("merge requires at least one report")
    if len(reports) == 1:
        return reports[0]

    common = set.intersection(*[r.entity_labels() for r in reports])
    merged = FaultReport(entries=[], mode=reports[0].mode + " (merged)",
                         ordered=True,
                         metadata={"merged_from": len(reports)})
    if not common:
        merged.notes.append(
            "no entity appears in all individual reports; empty merge")
        return merged

    texts = {}
    for r in reports:
        for e in r.entries:
            for label, text in e.statements:
                texts.setdefault(label, text)

    scored = sorted(
        ((Fraction(sum(r.entity_rank(label) for r in reports), len(reports)),
          label) for label in common),
        key=lambda t: (t[0], t[1]))
    for i, (avg, label) in enumerate(scored, start=1):
        merged.entries.append(ReportEntry(
            rank=i,
            statements=[(label, texts.get(label, ""))],
            clauses=[(0, str(label), f"average original rank {avg}")]))
    return merged


# ---------------------------------------------------------------------------
# Session construction helpers

def prepare_program(source_or_prog, unroll_bound=8):
    """Parse (if needed), build the CFG, SSA-transform, and unroll."""
    from . import cfg as cfg_mod

    prog = (lang.parse(source_or_prog)
            if isinstance(source_or_prog, str) else source_or_prog)
    graph = cfg_mod.build_cfg(prog)
    ssa_prog = ssa_mod.to_ssa(graph)
    # unrolling a loop-free program is the identity transform
    return ssa_mod.unroll_loops(ssa_prog, unroll_bound)


def run_session(session):
    return run_ofc(session) if session.mode == "ofc" else run_ba(session)
