"""Frontend: tokenizer, expression parser, program parser, checks."""

import pytest
from hypothesis import given, strategies as st

from mimpdebug import lang

from conftest import P_SOURCE


class TestExprParser:
    def test_precedence_mul_over_add(self):
        e = lang.parse_expr("1 + 2 * 3")
        assert e == lang.BinOp("+", lang.Num(1),
                               lang.BinOp("*", lang.Num(2), lang.Num(3)))

    def test_left_associativity(self):
        e = lang.parse_expr("a - b - c")
        assert e == lang.BinOp("-", lang.BinOp("-", lang.Var("a"), lang.Var("b")),
                               lang.Var("c"))

    def test_comparison_and_bool_ops(self):
        e = lang.parse_expr("a < b && !(c == 1) || d >= 0")
        assert isinstance(e, lang.BoolOp) and e.op == "||"
        assert isinstance(e.left, lang.BoolOp) and e.left.op == "&&"
        assert isinstance(e.left.right, lang.Not)

    def test_unary_minus(self):
        assert lang.parse_expr("-5") == lang.Num(-5)
        assert lang.parse_expr("-x") == lang.BinOp("-", lang.Num(0),
                                                   lang.Var("x"))

    def test_parens(self):
        e = lang.parse_expr("(1 + 2) * 3")
        assert e == lang.BinOp("*", lang.BinOp("+", lang.Num(1), lang.Num(2)),
                               lang.Num(3))

    def test_bool_literals(self):
        assert lang.parse_expr("true") == lang.BoolLit(True)
        assert lang.parse_expr("false") == lang.BoolLit(False)

    def test_trailing_garbage_rejected(self):
        with pytest.raises(lang.SyntaxErr):
            lang.parse_expr("1 + 2 )")

    def test_bad_character_rejected(self):
        with pytest.raises(lang.SyntaxErr):
            lang.parse_expr("a $ b")

    @given(st.integers(-1000, 1000))
    def test_roundtrip_numbers(self, n):
        assert lang.parse_expr(str(n)) == lang.Num(n)


class TestExprToStr:
    def test_parenthesizes_by_precedence(self):
        e = lang.parse_expr("(a + b) * c - d")
        assert lang.parse_expr(lang.expr_to_str(e)) == e

    @given(st.recursive(
        st.one_of(st.integers(-9, 9).map(lang.Num),
                  st.sampled_from("abc").map(lang.Var)),
        lambda sub: st.tuples(st.sampled_from("+-*"), sub, sub).map(
            lambda t: lang.BinOp(t[0], t[1], t[2])),
        max_leaves=12))
    def test_roundtrip_arbitrary_arith(self, e):
        assert lang.parse_expr(lang.expr_to_str(e)) == e


class TestProgramParser:
    def test_p_labels(self):
        prog = lang.parse(P_SOURCE)
        assert prog.name == "p"
        assert prog.params == ["x", "y"]
        # 'else' lines consume a label but define no statement
        assert sorted(prog.stmts) == [1, 2, 4, 5, 6, 8, 9]

    def test_p_structure(self):
        prog = lang.parse(P_SOURCE)
        first = prog.body[0]
        assert isinstance(first, lang.If) and first.label == 1
        assert [s.label for s in first.then_body] == [2]
        assert [s.label for s in first.else_body] == [4]
        assert isinstance(prog.body[-1], lang.Assert)

    def test_while_parses(self):
        prog = lang.parse(
            "prog w(n)\n"
            "    s = 0\n"
            "    while s < n\n"
            "        s = s + 1\n"
            "    assert s >= 0\n")
        loop = prog.body[1]
        assert isinstance(loop, lang.While)
        assert [s.label for s in loop.body] == [3]

    def test_comments_and_blank_lines_ignored(self):
        prog = lang.parse(
            "prog c(x)\n"
            "    // setup\n"
            "\n"
            "    a = x // trailing comment\n"
            "    assert a == x\n")
        assert sorted(prog.stmts) == [3, 4]

    def test_missing_header(self):
        with pytest.raises(lang.SyntaxErr):
            lang.parse("x = 1\nassert x == 1\n")

    def test_else_without_if(self):
        with pytest.raises(lang.SyntaxErr):
            lang.parse("prog e(x)\n    else\n    assert x == 0\n")

    def test_two_asserts_rejected(self):
        with pytest.raises(lang.SemanticErr):
            lang.parse("prog a(x)\n    assert x == 0\n    assert x == 1\n")

    def test_assert_must_be_last(self):
        with pytest.raises(lang.SemanticErr):
            lang.parse("prog a(x)\n    assert x == 0\n    y = 1\n")

    def test_use_before_def(self):
        with pytest.raises(lang.SemanticErr):
            lang.parse("prog u(x)\n    a = b + 1\n    assert a == 0\n")

    def test_branch_local_def_does_not_escape(self):
        src = ("prog b(x)\n"
               "    if x > 0\n"
               "        a = 1\n"
               "    else\n"
               "        c = 2\n"
               "    assert a == 1\n")
        with pytest.raises(lang.SemanticErr):
            lang.parse(src)

    def test_trailing_digit_names_rejected(self):
        with pytest.raises(lang.SemanticErr):
            lang.parse("prog d(x)\n    a1 = x\n    assert a1 == x\n")

    def test_pretty_roundtrip(self):
        prog = lang.parse(P_SOURCE)
        again = lang.parse(lang.pretty(prog))
        assert sorted(again.stmts) == sorted(prog.stmts)
        for label in prog.stmts:
            assert type(again.stmts[label]) is type(prog.stmts[label])


class TestAttachAssert:
    def test_replaces_final_assert(self):
        prog = lang.parse(P_SOURCE)
        pred = lang.parse_expr("b == 7")
        new = lang.attach_assert(prog, pred)
        assert new.body[-1].cond == pred
        assert prog.body[-1].cond != pred  # original untouched
        assert new.body[-1].label == prog.body[-1].label
