"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The random-program corpus (criteria 2, 5, 7) is generated once per run and
shared; it is loop-free with <= 3 conditionals and <= 30 statements per
program, analyzed at width 8 with unroll bound 8.
"""

import itertools
import random
import time
from fractions import Fraction

import pytest

from mimpdebug import driver, encoder, interp, lang, maxsat
from mimpdebug.driver import DebugSession, FaultReport, ReportEntry
from mimpdebug.weights import TOP, sqrt_fraction, weight_of

import _gen
from conftest import P_SOURCE, comss_label_sets

N_CORPUS = 210
N_INSTANCES = 500


def _verdict(capsys, number, description, failures):
    ok = not failures
    with capsys.disabled():
        print(f"\ncriterion {number} ({description}): "
              f"{'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {number} failed: {failures[:5]}"


# ---------------------------------------------------------------------------
# Shared corpus (criteria 2, 5, 7)

TIMING_REPS = 3


@pytest.fixture(scope="module")
def corpus():
    """Cases plus OFC/BA reports, the analysis wall-clock time, and
    noise-robust solve timings.

    Solve times are re-measured after the analysis in an interleaved pass:
    every instance (each OFC iteration's and BA's) is enumerated
    TIMING_REPS times in round-robin order and the fastest run is kept, so
    ambient load hits both modes equally. Enumeration is deterministic, so
    the re-measured runs repeat the analysis solves exactly.
    """
    cases = [_gen.gen_case(seed, allow_loops=False) for seed in range(N_CORPUS)]
    rows = []
    t0 = time.perf_counter()
    for case in cases:
        prog = driver.prepare_program(_gen.faulty_with_assert(case),
                                      unroll_bound=8)
        common = dict(program=prog, failing_input=case.failing_input,
                      width=8, keep_instances=True)
        ofc = driver.run_session(DebugSession(mode="ofc", **common))
        ba = driver.run_session(DebugSession(mode="ba", **common))
        rows.append({"case": case, "ofc": ofc, "ba": ba,
                     "ofc_times": [], "ba_time": None})
    elapsed = time.perf_counter() - t0

    jobs = []
    for row in rows:
        for inst in row["ofc"].instances:
            jobs.append((row, "ofc", inst))
        jobs.append((row, "ba", row["ba"].instances[0]))
    best = [None] * len(jobs)
    for _rep in range(TIMING_REPS):
        for j, (_row, _kind, inst) in enumerate(jobs):
            t0 = time.perf_counter()
            maxsat.enumerate_comss(inst, 5)
            dt = time.perf_counter() - t0
            best[j] = dt if best[j] is None else min(best[j], dt)
    for j, (row, kind, _inst) in enumerate(jobs):
        if kind == "ofc":
            row["ofc_times"].append(best[j])
        else:
            row["ba_time"] = best[j]
    return {"rows": rows, "elapsed_s": elapsed}


def _comss_sets(report):
    return sorted(sorted(s for s, _ in e.statements) for e in report.entries)


# ---------------------------------------------------------------------------

def test_criterion_1_worked_example(capsys):
    failures = []
    prog = driver.prepare_program(P_SOURCE, unroll_bound=8)
    failing = {"x": 0, "y": 0}

    # (a) the initial trace
    trace = interp.execute(prog, failing)
    if trace.steps != ["1", "2", "phi1", "5", "6", "phi2", "9"]:
        failures.append(f"trace steps {trace.steps}")

    # (b) the first trace formula has exactly six clauses
    tf = encoder.formula_generator(trace, encoder.TraceFormula(), prog)
    if len(tf.clauses) != 6:
        failures.append(f"TF1 has {len(tf.clauses)} clauses")

    session = DebugSession(program=prog, failing_input=failing, width=8)

    # warm-up query so kernel compilation is outside the timed window
    maxsat.enumerate_comss(driver.build_instance(tf, session), 1)

    # (c) iteration-1 CoMSSs
    comsses = maxsat.enumerate_comss(driver.build_instance(tf, session), 5)
    sets1 = {frozenset(str(tf.clause_origin[c]) for c in m.clause_ids)
             for m in comsses}
    if sets1 != {frozenset({"6"}), frozenset({"5"})}:
        failures.append(f"iteration-1 CoMSSs {sets1}")

    # (d) iteration-2 CoMSSs after expanding along the unexplored branch
    visited = interp.VisitedBranches()
    for br in trace.covered_branches:
        visited.insert(br, trace)
    flip = driver._next_flip_branch(comsses, tf, prog, visited)
    tr2 = interp.trace_generator(failing, visited, flip, prog)
    tf = encoder.formula_generator(tr2, tf, prog)
    comsses2 = maxsat.enumerate_comss(driver.build_instance(tf, session), 5)
    sets2 = {frozenset(str(tf.clause_origin[c]) for c in m.clause_ids)
             for m in comsses2}
    if sets2 != {frozenset({"6"}), frozenset({"5", "8"})}:
        failures.append(f"iteration-2 CoMSSs {sets2}")

    # (e, f, g) the full run: final report, iteration count, runtime
    t0 = time.perf_counter()
    fresh = driver.prepare_program(P_SOURCE, unroll_bound=8)
    report = driver.run_ofc(DebugSession(program=fresh, failing_input=failing,
                                         width=8))
    elapsed = time.perf_counter() - t0
    if comss_label_sets(report) != {frozenset({6}), frozenset({5, 8})}:
        failures.append(f"final report {comss_label_sets(report)}")
    if report.metadata["iterations"] != 2:
        failures.append(f"{report.metadata['iterations']} iterations")
    if (report.metadata["paths_explored"] != 2
            or report.metadata["total_paths"] != 4):
        failures.append(f"{report.metadata['paths_explored']} of "
                        f"{report.metadata['total_paths']} paths")
    if elapsed >= 5.0:
        failures.append(f"runtime {elapsed:.2f}s")

    _verdict(capsys, 1, "worked example fidelity", failures)


def test_criterion_2_ofc_equals_ba(capsys, corpus):
    failures = []
    for row in corpus["rows"]:
        if _comss_sets(row["ofc"]) != _comss_sets(row["ba"]):
            failures.append(
                (row["case"].seed, _comss_sets(row["ofc"]),
                 _comss_sets(row["ba"])))
    if corpus["elapsed_s"] >= 600:
        failures.append(f"corpus analysis took {corpus['elapsed_s']:.0f}s")
    _verdict(capsys, 2,
             f"OFC = BA on {len(corpus['rows'])} random programs", failures)


def test_criterion_3_enumeration_oracle(capsys):
    failures = []
    rng = random.Random(42)
    for i in range(N_INSTANCES):
        inst = _gen.gen_instance(rng)
        fast = maxsat.enumerate_comss(inst, 3)
        slow = maxsat.brute_force_comss(inst, 3)
        if ({c.clause_ids for c in fast} != {c.clause_ids for c in slow}):
            failures.append(("mismatch", i))
            continue
        soft_by_id = {c.id: c for c in inst.soft}
        all_exprs = [c.constraint for c in inst.hard]
        for comss in fast:
            kept = [c.constraint for c in inst.soft
                    if c.id not in comss.clause_ids]
            # correction: dropping the CoMSS leaves a satisfiable instance
            if not maxsat.sat(all_exprs + kept, inst.universe).is_sat:
                failures.append(("not a correction", i, comss.clause_ids))
            # minimality: restoring any dropped clause restores the conflict
            for cid in comss.clause_ids:
                back = kept + [soft_by_id[cid].constraint]
                if maxsat.sat(all_exprs + back, inst.universe).is_sat:
                    failures.append(("not minimal", i, comss.clause_ids, cid))
    _verdict(capsys, 3,
             f"CoMSS enumeration vs brute force on {N_INSTANCES} instances",
             failures)


def test_criterion_4_weight_steering(capsys):
    failures = []
    rng = random.Random(7)
    for i in range(50):
        # two soft clauses in direct conflict with each other
        kind = rng.randrange(2)
        if kind == 0:
            e1, e2 = lang.parse_expr("a < b"), lang.parse_expr("b < a")
        else:
            v1, v2 = rng.sample(range(-4, 5), 2)
            e1, e2 = (lang.parse_expr(f"a == {v1}"),
                      lang.parse_expr(f"a == {v2}"))
        w1 = Fraction(rng.randint(1, 30), rng.randint(1, 5))
        w2 = w1
        while w2 == w1:
            w2 = Fraction(rng.randint(1, 30), rng.randint(1, 5))
        soft = [encoder.Clause(id=1, kind=encoder.ASSIGN, constraint=e1,
                               origin="s1", hard=False, weight=w1),
                encoder.Clause(id=2, kind=encoder.ASSIGN, constraint=e2,
                               origin="s2", hard=False, weight=w2)]
        inst = maxsat.MaxSatInstance(
            hard=[], soft=soft,
            universe={"a": ("int", 4), "b": ("int", 4)}, declared_width=4)
        out = maxsat.enumerate_comss(inst, 2, mode="weighted")
        heavier = 1 if w1 > w2 else 2
        if not out or heavier in out[0].clause_ids:
            failures.append((i, w1, w2,
                             [sorted(c.clause_ids) for c in out]))

    # weight(e) = 1 / susp(e), exact; susp 0 -> top weight
    if weight_of(Fraction(3, 7)) != Fraction(7, 3):
        failures.append("weight_of(3/7)")
    if weight_of(1 / sqrt_fraction(2)) != sqrt_fraction(2):
        failures.append("weight_of(1/sqrt(2))")
    if weight_of(Fraction(0)) is not TOP:
        failures.append("weight_of(0)")
    _verdict(capsys, 4, "weighted solver steering", failures)


def test_criterion_5_formula_economy(capsys, corpus):
    failures = []
    unexplored, explored = [], []
    for row in corpus["rows"]:
        meta = row["ofc"].metadata
        pair = (meta["statement_clause_count"],
                row["ba"].metadata["statement_clause_count"])
        if meta["branches_visited"] < meta["branches_total"]:
            unexplored.append(pair)
        else:
            explored.append(pair)

    if unexplored:
        mean_ofc = sum(o for o, _ in unexplored) / len(unexplored)
        mean_ba = sum(b for _, b in unexplored) / len(unexplored)
        if not mean_ofc < mean_ba:
            failures.append(
                f"mean clauses with unexplored branches: "
                f"OFC {mean_ofc:.2f} vs BA {mean_ba:.2f}")
    for o, b in explored:
        if o > b:
            failures.append(f"OFC clauses {o} > BA {b} on explored case")

    ofc_times = [t for row in corpus["rows"] for t in row["ofc_times"]]
    ba_times = [row["ba_time"] for row in corpus["rows"]]
    mean_ofc_t = sum(ofc_times) / len(ofc_times)
    mean_ba_t = sum(ba_times) / len(ba_times)
    if not mean_ofc_t < mean_ba_t:
        failures.append(f"mean per-iteration solve: OFC {mean_ofc_t:.4f}s "
                        f"vs BA {mean_ba_t:.4f}s")
    with capsys.disabled():
        print(f"\n  [criterion 5] {len(unexplored)} cases with unexplored "
              f"branches; mean solve OFC {mean_ofc_t:.4f}s, "
              f"BA {mean_ba_t:.4f}s")
    _verdict(capsys, 5, "formula economy trend", failures)


def test_criterion_6_merge_reports(capsys):
    failures = []

    def entry(rank, labels):
        return ReportEntry(rank=rank,
                           statements=[(l, f"s{l}") for l in labels],
                           clauses=[(0, str(l), "") for l in labels])

    r1 = FaultReport(entries=[entry(1, [6]), entry(2, [5, 8])],
                     mode="ofc", ordered=True)
    r2 = FaultReport(entries=[entry(1, [5]), entry(2, [6]), entry(3, [2])],
                     mode="ofc", ordered=True)
    merged = driver.merge_reports([r1, r2])
    # hand-computed: common entities {5, 6}; avg ranks 5 -> (2+1)/2 = 3/2,
    # 6 -> (1+2)/2 = 3/2; tie broken by label, so 5 before 6; entities 8
    # and 2 are dropped
    labels = [e.statements[0][0] for e in merged.entries]
    if labels != [5, 6]:
        failures.append(f"merged labels {labels}")
    if [e.rank for e in merged.entries] != [1, 2]:
        failures.append("merged ranks")
    if merged.entity_labels() != {5, 6}:
        failures.append(f"kept entities {merged.entity_labels()}")
    _verdict(capsys, 6, "report merging", failures)


def test_criterion_7_transform_preserves_semantics(capsys, corpus):
    failures = []
    for row in corpus["rows"]:
        case = row["case"]
        for original in (case.correct, _gen.faulty_with_assert(case)):
            ssa_prog = driver.prepare_program(original, unroll_bound=8)
            n = len(original.params)
            for point in itertools.product(_gen.INPUT_RANGE, repeat=n):
                inputs = dict(zip(original.params, point))
                res = interp.run_program(original, inputs)
                trace = interp.execute(ssa_prog, inputs)
                if trace.verdict == interp.TRUNCATED:
                    failures.append((case.seed, inputs, "truncated"))
                    continue
                if (trace.verdict == interp.PASSED) != res.assert_ok:
                    failures.append((case.seed, inputs, "verdict"))
                # final value of every original variable
                finals = {}
                for ssa_name, (orig, version) in ssa_prog.orig_of.items():
                    if ssa_name in trace.values:
                        prev = finals.get(orig, (0, None))
                        if version > prev[0]:
                            finals[orig] = (version, trace.values[ssa_name])
                for orig, (_v, value) in finals.items():
                    if res.env.get(orig) != value:
                        failures.append((case.seed, inputs, orig))
    _verdict(capsys, 7, "SSA + unroll preserves semantics", failures)
