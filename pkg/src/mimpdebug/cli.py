"""Command-line entry point.

Subcommands:
  debug    run one analysis mode on a program + test suite, emit a report
  compare  run ba / ba+cw / ofc / ofc+cw over a corpus and tabulate
  dump     SSA / CFG / trace / formula debug dumps

Test suites are JSON: {"output": "b", "golden": "golden.mimp",
"tests": [{"id": "t1", "input": {"x": 0}, "assert": "b == 3"}]}; tests
without an explicit assert get one derived from the golden program's
output (materialized so reruns don't need the golden).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import cfg as cfg_mod
from . import driver, encoder, interp, lang, maxsat, ssa as ssa_mod
from . import weights as weights_mod

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_ANALYSIS = 4


class CliError(Exception):
    def __init__(self, msg, code=EXIT_ANALYSIS):
        super().__init__(msg)
        self.code = code


# ---------------------------------------------------------------------------
# Test suites

@dataclass
class TestCase:
    test_id: str
    inputs: dict
    assertion: object = None  # expression, or None until derived


@dataclass
class TestSuite:
    tests: list
    output_var: str = None
    golden: object = None  # MiniImpProgram or None


def load_suite(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read test suite: {e}", EXIT_FILE)
    except json.JSONDecodeError as e:
        raise CliError(f"bad test suite JSON: {e}", EXIT_FILE)
    golden = None
    if doc.get("golden"):
        gpath = os.path.join(os.path.dirname(os.path.abspath(path)),
                             doc["golden"])
        golden = lang.parse(_read(gpath))
    tests = []
    for i, t in enumerate(doc.get("tests", [])):
        assertion = None
        if t.get("assert"):
            assertion = lang.parse_expr(t["assert"])
        tests.append(TestCase(test_id=str(t.get("id", f"t{i}")),
                              inputs={k: int(v) for k, v in t["input"].items()},
                              assertion=assertion))
    return TestSuite(tests=tests, output_var=doc.get("output"), golden=golden)


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}", EXIT_FILE)


def derive_assertions(golden, suite):
    """Fill in missing assertions by running each input against the golden
    program and equating the observed output variable with its value."""
    out = []
    for t in suite.tests:
        if t.assertion is not None:
            out.append(t)
            continue
        if golden is None or suite.output_var is None:
            raise CliError(
                f"test {t.test_id!r} has no assertion and no golden "
                "program/output variable to derive one", EXIT_USAGE)
        res = interp.run_program(golden, t.inputs)
        if not res.assert_ok:
            raise CliError(
                f"golden program violates its own assert on {t.test_id!r}")
        if suite.output_var not in res.env:
            raise CliError(
                f"output variable {suite.output_var!r} undefined after "
                f"golden run of {t.test_id!r}")
        value = res.env[suite.output_var]
        out.append(TestCase(
            t.test_id, dict(t.inputs),
            lang.Cmp("==", lang.Var(suite.output_var), lang.Num(value))))
    return TestSuite(tests=out, output_var=suite.output_var, golden=golden)


def classify_tests(prog, suite):
    """Attach per-test assertions and split into passing/failing, with
    coverage rows for the weights stage."""
    passing, failing, rows = [], [], []
    for t in suite.tests:
        variant = lang.attach_assert(prog, t.assertion)
        res = interp.run_program(variant, t.inputs)
        outcome = "pass" if res.assert_ok else "fail"
        rows.append(weights_mod.CoverageRow(
            t.test_id, outcome,
            frozenset(res.covered_stmts), frozenset(res.covered_branches)))
        (passing if res.assert_ok else failing).append((t, variant))
    return passing, failing, rows


# ---------------------------------------------------------------------------
# Analysis plumbing

MODES = ("ba", "ba+cw", "ofc", "ofc+cw")


def analyze(prog, suite, mode, width=32, unroll=8, max_comss_size=5,
            max_iters=64, max_conflicts=10_000_000):
    """Run one mode over every failing test and merge the reports."""
    if suite.golden is not None:
        suite = derive_assertions(suite.golden, suite)
    for t in suite.tests:
        if t.assertion is None:
            raise CliError(f"test {t.test_id!r} has no assertion and the "
                           "suite has no golden program", EXIT_USAGE)
    passing, failing, rows = classify_tests(prog, suite)
    if not failing:
        raise CliError("no failing test: nothing to debug")

    weighted = mode.endswith("+cw")
    base_mode = mode.split("+")[0]
    susp = None
    if weighted:
        susp = weights_mod.ochiai(weights_mod.CoverageMatrix(rows))

    reports = []
    for t, variant in failing:
        ssa_prog = driver.prepare_program(variant, unroll_bound=unroll)
        session = driver.DebugSession(
            program=ssa_prog, failing_input=t.inputs, mode=base_mode,
            weighted=weighted, susp=susp, width=width,
            max_comss_size=max_comss_size, max_iters=max_iters,
            max_conflicts=max_conflicts)
        reports.append(driver.run_session(session))
    return driver.merge_reports(reports) if len(reports) > 1 else reports[0]


# ---------------------------------------------------------------------------
# Subcommands

def cmd_debug(args):
    prog = lang.parse(_read(args.program))
    suite = load_suite(args.tests)
    report = analyze(prog, suite, args.mode, width=args.width,
                     unroll=args.unroll, max_comss_size=args.max_comss_size,
                     max_iters=args.max_iters, max_conflicts=args.timeout)
    text = (report.to_json() if args.report == "json" else report.to_text())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        print(text)
    return EXIT_OK


def cmd_compare(args):
    cases = _find_cases(args.corpus)
    if not cases:
        raise CliError(f"no cases found under {args.corpus}", EXIT_FILE)
    results = []
    for name, prog_path, tests_path in cases:
        prog = lang.parse(_read(prog_path))
        for mode in MODES:
            suite = load_suite(tests_path)
            t0 = time.perf_counter()
            try:
                report = analyze(prog, suite, mode, width=args.width,
                                 unroll=args.unroll,
                                 max_comss_size=args.max_comss_size,
                                 max_iters=args.max_iters,
                                 max_conflicts=args.timeout)
                elapsed = time.perf_counter() - t0
                iters = report.metadata.get("iterations", 1)
                fault = _fault_line(tests_path)
                if fault is not None and report.ordered:
                    rank = report.entity_rank(fault)
                    rank_text = str(rank) if rank is not None else "miss"
                elif fault is not None and fault not in report.entity_labels():
                    rank_text = "miss"
                else:
                    rank_text = str(float(report.examination_cost()))
                results.append((name, mode, rank_text, f"{elapsed:.3f}",
                                str(iters)))
            except (CliError, driver.DriverError, maxsat.SolverError,
                    encoder.EncodingError) as e:
                results.append((name, mode, "error", "-", "-"))
                print(f"# {name}/{mode}: {e}", file=sys.stderr)
    header = ("case", "mode", "rank", "time_s", "iterations")
    rows = [header] + results
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return EXIT_OK


def _find_cases(corpus):
    cases = []
    for entry in sorted(os.listdir(corpus)):
        d = os.path.join(corpus, entry)
        if not os.path.isdir(d):
            continue
        prog_path = os.path.join(d, "program.mimp")
        tests_path = os.path.join(d, "tests.json")
        if os.path.exists(prog_path) and os.path.exists(tests_path):
            cases.append((entry, prog_path, tests_path))
    return cases


def _fault_line(tests_path):
    with open(tests_path) as fh:
        doc = json.load(fh)
    return doc.get("fault_line")


def cmd_dump(args):
    prog = lang.parse(_read(args.program))
    ssa_prog = driver.prepare_program(prog, unroll_bound=args.unroll)
    if args.what == "ssa":
        print(ssa_mod.ssa_to_text(ssa_prog), end="")
    elif args.what == "cfg":
        graph = cfg_mod.build_cfg(prog)
        for s, d, t in graph.edges:
            tag = "" if t is None else ("  [true]" if t else "  [false]")
            print(f"{s} -> {d}{tag}")
    elif args.what in ("trace", "formula"):
        if not args.tests:
            raise CliError("trace/formula dumps need --tests", EXIT_USAGE)
        suite = load_suite(args.tests)
        if suite.golden is not None:
            suite = derive_assertions(suite.golden, suite)
        _passing, failing, _rows = classify_tests(prog, suite)
        if not failing:
            raise CliError("no failing test to trace")
        t, variant = failing[0]
        ssa_prog = driver.prepare_program(variant, unroll_bound=args.unroll)
        trace = interp.execute(ssa_prog, t.inputs)
        if args.what == "trace":
            print(interp.trace_to_text(trace, ssa_prog), end="")
        else:
            tf = encoder.formula_generator(trace, encoder.TraceFormula(),
                                           ssa_prog)
            print(encoder.formula_to_text(tf), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing

def _load_config():
    path = os.environ.get("MIMPDEBUG_CONFIG")
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"bad config file {path}: {e}", EXIT_FILE)


def _add_common(p, cfg):
    p.add_argument("--width", type=int, default=cfg.get("width", 32),
                   help="bit width of declared variables")
    p.add_argument("--unroll", type=int, default=cfg.get("unroll", 8),
                   help="loop unroll bound")
    p.add_argument("--max-comss-size", type=int,
                   default=cfg.get("max_comss_size", 5),
                   help="largest CoMSS reported")
    p.add_argument("--max-iters", type=int, default=cfg.get("max_iters", 64),
                   help="OFC iteration cap")
    p.add_argument("--timeout", type=int,
                   default=cfg.get("timeout", 10_000_000),
                   help="solver conflict budget per query")


def build_parser(cfg):
    p = argparse.ArgumentParser(
        prog="mimpdebug",
        description="formula-based fault localization for MiniImp programs")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("debug", help="localize the fault for one mode")
    d.add_argument("program")
    d.add_argument("tests")
    d.add_argument("--mode", choices=MODES, default=cfg.get("mode", "ofc"))
    d.add_argument("--report", choices=("text", "json"), default="text")
    d.add_argument("--out", help="write the report to a file")
    _add_common(d, cfg)
    d.set_defaults(func=cmd_debug)

    c = sub.add_parser("compare", help="run all four modes over a corpus")
    c.add_argument("--corpus", required=True)
    _add_common(c, cfg)
    c.set_defaults(func=cmd_compare)

    u = sub.add_parser("dump", help="debug dumps")
    u.add_argument("program")
    u.add_argument("--what", choices=("ssa", "cfg", "trace", "formula"),
                   default="ssa")
    u.add_argument("--tests")
    _add_common(u, cfg)
    u.set_defaults(func=cmd_dump)
    return p


def main(argv=None):
    try:
        cfg = _load_config()
        parser = build_parser(cfg)
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (lang.MiniImpError, ssa_mod.SsaError, interp.InterpError,
            encoder.EncodingError, maxsat.SolverError, driver.DriverError,
            weights_mod.WeightsError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
