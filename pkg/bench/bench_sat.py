"""Benchmark: numba-compiled CDCL kernel vs the pure-numpy fallback.

The kernel is selected at import time by the MIMPDEBUG_PURE_PYTHON
environment variable, so each configuration runs in a subprocess. The
workload enumerates CoMSSs for the worked example and a slice of the
random-program corpus — the same solver-bound path the debugger exercises.

Usage: python bench/bench_sat.py [--cases N] [--reps N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
sys.path.insert(0, {tests_dir!r})
import _gen
from mimpdebug import cdcl, driver, maxsat
from mimpdebug.driver import DebugSession

n_cases, reps = json.loads(sys.argv[1])

# warm-up: triggers numba compilation (cached) outside the timed region
_warm = maxsat.sat([], {{"a": ("int", 3)}})

results = {{}}

t0 = time.perf_counter()
prog = driver.prepare_program(
    "prog p(x, y)\n"
    "    if x >= 0\n        a = x\n    else\n        a = -x\n"
    "    if y < 5\n        b = a + 1\n    else\n        b = a + 2\n"
    "    assert b <= a\n", unroll_bound=8)
for _ in range(reps):
    driver.run_ofc(DebugSession(program=prog,
                                failing_input={{"x": 0, "y": 0}}, width=8))
results["worked_example_s"] = (time.perf_counter() - t0) / reps

t0 = time.perf_counter()
for seed in range(n_cases):
    case = _gen.gen_case(seed, allow_loops=False)
    sp = driver.prepare_program(_gen.faulty_with_assert(case), unroll_bound=8)
    driver.run_ofc(DebugSession(program=sp, failing_input=case.failing_input,
                                width=8))
results["corpus_s"] = time.perf_counter() - t0
results["kernel"] = "pure-numpy" if cdcl.PURE_PYTHON else "numba"
print(json.dumps(results))
"""


def run_config(pure, n_cases, reps, tests_dir):
    env = dict(os.environ)
    if pure:
        env["MIMPDEBUG_PURE_PYTHON"] = "1"
    else:
        env.pop("MIMPDEBUG_PURE_PYTHON", None)
    code = WORKER.format(tests_dir=tests_dir)
    out = subprocess.run(
        [sys.executable, "-c", code, json.dumps([n_cases, reps])],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=10,
                    help="random corpus programs per configuration")
    ap.add_argument("--reps", type=int, default=3,
                    help="repetitions of the worked example")
    args = ap.parse_args()

    tests_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                             os.pardir, "tests")
    rows = []
    for pure in (False, True):
        name = "pure-numpy" if pure else "numba"
        print(f"running {name} kernel ...", flush=True)
        rows.append(run_config(pure, args.cases, args.reps, tests_dir))

    print(f"\n{'kernel':<12} {'worked example':>16} "
          f"{'corpus (' + str(args.cases) + ' cases)':>20}")
    for r in rows:
        print(f"{r['kernel']:<12} {r['worked_example_s']:>15.3f}s "
              f"{r['corpus_s']:>19.3f}s")
    if rows[0]["corpus_s"] > 0:
        print(f"\nspeedup (corpus): "
              f"{rows[1]['corpus_s'] / rows[0]['corpus_s']:.1f}x")


if __name__ == "__main__":
    main()
