"""Concrete tracer: plain execution, hijacking, trace_generator."""

import pytest
from hypothesis import given, strategies as st

from mimpdebug import driver, interp, lang
from mimpdebug.cfg import Branch

from conftest import P_SOURCE


class TestEvalExpr:
    @given(st.integers(-100, 100), st.integers(-100, 100))
    def test_arith_matches_python(self, a, b):
        env = {"a": a, "b": b}
        assert interp.eval_expr(lang.parse_expr("a + b * a - 3"), env) \
            == a + b * a - 3

    @given(st.integers(-10, 10), st.integers(-10, 10))
    def test_comparisons_match_python(self, a, b):
        env = {"a": a, "b": b}
        for op, fn in [("<", a < b), ("<=", a <= b), (">", a > b),
                       (">=", a >= b), ("==", a == b), ("!=", a != b)]:
            assert bool(interp.eval_expr(lang.Cmp(op, lang.Var("a"),
                                                  lang.Var("b")), env)) == fn


class TestRunProgram:
    def test_p_coverage_failing_input(self):
        prog = lang.parse(P_SOURCE)
        res = interp.run_program(prog, {"x": 0, "y": 0})
        assert not res.assert_ok
        assert res.covered_stmts == {1, 2, 5, 6, 9}
        assert res.covered_branches == {(1, True), (5, True)}

    def test_loop_executes_concretely(self):
        prog = lang.parse(
            "prog s(n)\n    t = 0\n    i = 0\n    while i < n\n"
            "        t = t + i\n        i = i + 1\n    assert t >= 0\n")
        res = interp.run_program(prog, {"n": 4})
        assert res.env["t"] == 0 + 1 + 2 + 3
        assert res.assert_ok

    def test_step_cap(self):
        prog = lang.parse(
            "prog f(n)\n    i = 0\n    while i < 1\n        i = i * 1\n"
            "    assert i == 0\n")
        with pytest.raises(interp.InterpError):
            interp.run_program(prog, {"n": 0}, step_cap=100)


class TestExecute:
    def test_p_iteration1_trace(self, p_ssa):
        # §III-B4: input {x=0,y=0} covers {1,2,phi1,5,6,phi2,9}
        tr = interp.execute(p_ssa, {"x": 0, "y": 0})
        assert [str(s) for s in tr.steps] == \
            ["1", "2", "phi1", "5", "6", "phi2", "9"]
        assert tr.verdict == interp.VIOLATED
        assert tr.guards == {"guard1": True, "guard2": True}
        assert tr.values["a3"] == 0 and tr.values["b1"] == 1

    def test_passing_input(self, p_ssa):
        # assert b<=a never holds for these additions, but check verdicts
        tr = interp.execute(p_ssa, {"x": -3, "y": 9})
        assert tr.verdict == interp.VIOLATED
        assert tr.values["a3"] == 3 and tr.values["b2"] == 5

    def test_missing_input_rejected(self, p_ssa):
        with pytest.raises(interp.InterpError):
            interp.execute(p_ssa, {"x": 0})


class TestHijack:
    def test_p_flip_to_5_8(self, p_ssa):
        # §III-B4: forcing branch (5,8) yields trace {1,2,phi1,5,8,phi2,9}
        old = interp.execute(p_ssa, {"x": 0, "y": 0})
        flipped = interp.execute_hijacked(
            p_ssa, {"x": 0, "y": 0}, old, Branch("5", False))
        assert [str(s) for s in flipped.steps] == \
            ["1", "2", "phi1", "5", "8", "phi2", "9"]
        assert flipped.flip_index == 1
        assert flipped.guards["guard2"] is False
        # concrete log reflects the actually computed value on the forced path
        assert flipped.values["b2"] == 2

    def test_prefix_property(self, p_ssa):
        old = interp.execute(p_ssa, {"x": 0, "y": 0})
        flipped = interp.execute_hijacked(
            p_ssa, {"x": 0, "y": 0}, old, Branch("5", False))
        i = flipped.flip_index
        assert flipped.decisions[:i] == old.decisions[:i]
        assert flipped.decisions[i] == ("5", False)

    def test_unknown_conditional_rejected(self, p_ssa):
        old = interp.execute(p_ssa, {"x": 0, "y": 0})
        with pytest.raises(interp.HijackError):
            interp.execute_hijacked(p_ssa, {"x": 0, "y": 0}, old,
                                    Branch("77", True))

    def test_flip_into_loop_body(self):
        src = ("prog l(n)\n"
               "    s = 1\n"
               "    while n < 0\n"
               "        s = s + 1\n"
               "    assert s == 1\n")
        prog = driver.prepare_program(src, unroll_bound=3)
        old = interp.execute(prog, {"n": 2})  # loop never entered
        assert old.guards == {"guard1": False}
        forced = interp.execute_hijacked(prog, {"n": 2}, old,
                                         Branch("2", True))
        # forced into the body once; subsequent replicas run natively
        assert forced.guards["guard1"] is True
        assert forced.values["s2"] == 2
        assert Branch("2@2", False) in forced.covered_branches


class TestTraceGenerator:
    def test_first_call_plain(self, p_ssa):
        visited = interp.VisitedBranches()
        tr = interp.trace_generator({"x": 0, "y": 0}, visited, None, p_ssa)
        assert visited.branches() == {Branch("1", True), Branch("5", True)}
        assert visited.get(Branch("5", True)) is tr

    def test_second_call_flips_and_records(self, p_ssa):
        visited = interp.VisitedBranches()
        interp.trace_generator({"x": 0, "y": 0}, visited, None, p_ssa)
        tr2 = interp.trace_generator({"x": 0, "y": 0}, visited,
                                     Branch("5", False), p_ssa)
        assert Branch("5", False) in visited
        assert visited.get(Branch("5", False)) is tr2

    def test_revisiting_inserts_nothing_new(self, p_ssa):
        visited = interp.VisitedBranches()
        interp.trace_generator({"x": 0, "y": 0}, visited, None, p_ssa)
        tr1 = visited.get(Branch("5", True))
        interp.trace_generator({"x": 0, "y": 0}, visited,
                               Branch("5", True), p_ssa)
        assert visited.get(Branch("5", True)) is tr1  # first-covering wins

    def test_unreached_conditional_rejected(self, p_ssa):
        visited = interp.VisitedBranches()
        with pytest.raises(interp.HijackError):
            interp.trace_generator({"x": 0, "y": 0}, visited,
                                   Branch("5", False), p_ssa)
