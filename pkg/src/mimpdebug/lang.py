"""MiniImp frontend: expression/statement AST, parser, and pretty printer.

MiniImp is a tiny integer-only imperative language (see docs/lang.md).
A program is a one-line header followed by an indentation-structured body;
statement labels are the body line numbers (header excluded), which is how
fault reports refer back to the source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class MiniImpError(Exception):
    """Base class for frontend errors."""


class SyntaxErr(MiniImpError):
    def __init__(self, msg, line, col=None):
        self.line = line
        self.col = col
        loc = f"line {line}" + (f", col {col}" if col is not None else "")
        super().__init__(f"{loc}: {msg}")


class SemanticErr(MiniImpError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class BinOp:
    op: str  # + - *
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class BoolOp:
    op: str  # && ||
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class GuardVar:
    """Boolean solver variable standing for a conditional's outcome.

    Never produced by the parser; appears only in encoded clauses.
    """

    name: str


@dataclass(frozen=True)
class Iff:
    """Boolean equivalence; used by guard-definition clauses."""

    left: object
    right: object


ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


def expr_vars(e):
    """Set of integer variable names occurring in an expression."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Num, BoolLit, GuardVar)):
        return set()
    if isinstance(e, (BinOp, Cmp, BoolOp)):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Iff):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Not):
        return expr_vars(e.arg)
    raise TypeError(f"not an expression: {e!r}")


def rename_vars(e, mapping):
    """Rewrite Var nodes through `mapping` (name -> name); others untouched."""
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, (Num, BoolLit, GuardVar)):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, rename_vars(e.left, mapping), rename_vars(e.right, mapping))
    if isinstance(e, Cmp):
        return Cmp(e.op, rename_vars(e.left, mapping), rename_vars(e.right, mapping))
    if isinstance(e, BoolOp):
        return BoolOp(e.op, rename_vars(e.left, mapping), rename_vars(e.right, mapping))
    if isinstance(e, Iff):
        return Iff(rename_vars(e.left, mapping), rename_vars(e.right, mapping))
    if isinstance(e, Not):
        return Not(rename_vars(e.arg, mapping))
    raise TypeError(f"not an expression: {e!r}")


def expr_to_str(e):
    """Render an expression in MiniImp concrete syntax (fully parenthesized
    only where needed)."""

    def prec(x):
        if isinstance(x, BoolOp):
            return 1 if x.op == "||" else 2
        if isinstance(x, Not):
            return 3
        if isinstance(x, (Cmp, Iff)):
            return 4
        if isinstance(x, BinOp):
            return 5 if x.op in ("+", "-") else 6
        return 9

    def render(x, parent_prec):
        p = prec(x)
        if isinstance(x, Num):
            s = str(x.value)
            if x.value < 0 and parent_prec >= 5:
                s = f"({s})"
            return s
        elif isinstance(x, Var):
            s = x.name
        elif isinstance(x, GuardVar):
            s = x.name
        elif isinstance(x, BoolLit):
            s = "true" if x.value else "false"
        elif isinstance(x, BinOp):
            s = f"{render(x.left, p)} {x.op} {render(x.right, p + 1)}"
        elif isinstance(x, Cmp):
            s = f"{render(x.left, p)} {x.op} {render(x.right, p)}"
        elif isinstance(x, Iff):
            s = f"{render(x.left, p)} <=> {render(x.right, p)}"
        elif isinstance(x, BoolOp):
            s = f"{render(x.left, p)} {x.op} {render(x.right, p + 1)}"
        elif isinstance(x, Not):
            s = f"!{render(x.arg, p)}"
        else:
            raise TypeError(f"not an expression: {x!r}")
        return f"({s})" if p < parent_prec else s

    return render(e, 0)


# ---------------------------------------------------------------------------
# Statements

@dataclass
class Assign:
    label: int
    target: str
    value: object


@dataclass
class If:
    label: int
    cond: object
    then_body: list
    else_body: list


@dataclass
class While:
    label: int
    cond: object
    body: list


@dataclass
class Assert:
    label: int
    cond: object


@dataclass
class MiniImpProgram:
    name: str
    params: list  # input variable names, integer-typed
    body: list
    stmts: dict = field(default_factory=dict)  # label -> statement

    def assert_stmt(self):
        for st in self.stmts.values():
            if isinstance(st, Assert):
                return st
        raise SemanticErr("program has no assert")


def iter_stmts(body):
    for st in body:
        yield st
        if isinstance(st, If):
            yield from iter_stmts(st.then_body)
            yield from iter_stmts(st.else_body)
        elif isinstance(st, While):
            yield from iter_stmts(st.body)


# ---------------------------------------------------------------------------
# Tokenizer / expression parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>==|!=|<=|>=|&&|\|\||[-+*<>!()=]))"
)

_KEYWORDS = {"if", "else", "while", "assert", "prog", "true", "false"}


def _tokenize(text, line):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise SyntaxErr(f"unexpected character {text[pos:].strip()[0]!r}",
                                line, pos + 1)
            break
        pos = m.end()
        if m.group("num") is not None:
            tokens.append(("num", int(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
    return tokens


class _ExprParser:
    def __init__(self, tokens, line):
        self.toks = tokens
        self.i = 0
        self.line = line

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise SyntaxErr(f"expected {op!r}", self.line)

    def done(self):
        return self.i >= len(self.toks)

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.peek() == ("op", "||"):
            self.take()
            left = BoolOp("||", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.peek() == ("op", "&&"):
            self.take()
            left = BoolOp("&&", left, self.parse_not())
        return left

    def parse_not(self):
        if self.peek() == ("op", "!"):
            self.take()
            return Not(self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self):
        left = self.parse_add()
        kind, val = self.peek()
        if kind == "op" and val in CMP_OPS:
            self.take()
            return Cmp(val, left, self.parse_add())
        return left

    def parse_add(self):
        left = self.parse_mul()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.take()
                left = BinOp(val, left, self.parse_mul())
            else:
                return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.peek() == ("op", "*"):
            self.take()
            left = BinOp("*", left, self.parse_unary())
        return left

    def parse_unary(self):
        kind, val = self.peek()
        if (kind, val) == ("op", "-"):
            self.take()
            inner = self.parse_unary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return BinOp("-", Num(0), inner)
        return self.parse_atom()

    def parse_atom(self):
        kind, val = self.take()
        if kind == "num":
            return Num(val)
        if kind == "name":
            if val == "true":
                return BoolLit(True)
            if val == "false":
                return BoolLit(False)
            if val in _KEYWORDS:
                raise SyntaxErr(f"unexpected keyword {val!r} in expression", self.line)
            return Var(val)
        if (kind, val) == ("op", "("):
            e = self.parse_expr()
            self.expect_op(")")
            return e
        raise SyntaxErr("expected expression", self.line)


def parse_expr(text, line=0):
    p = _ExprParser(_tokenize(text, line), line)
    e = p.parse_expr()
    if not p.done():
        raise SyntaxErr("trailing tokens after expression", line)
    return e


# ---------------------------------------------------------------------------
# Program parser

_HEADER_RE = re.compile(
    r"^\s*prog\s+(?P<name>[A-Za-z_][A-Za-z_0-9]*)\s*"
    r"\(\s*(?P<params>[^)]*)\)\s*$"
)


def _indent_of(line):
    n = 0
    for ch in line:
        if ch == " ":
            n += 1
        elif ch == "\t":
            n += 4
        else:
            break
    return n


def parse(source):
    """Parse MiniImp source text into a MiniImpProgram.

    Statement labels are body line numbers: the line right after the header
    is line 1, matching how the debugger reports locations.
    """
    lines = source.splitlines()
    if not lines:
        raise SyntaxErr("empty source", 1)
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise SyntaxErr("expected header 'prog name(params)'", 1)
    name = m.group("name")
    params_text = m.group("params").strip()
    params = []
    if params_text:
        for p in params_text.split(","):
            p = p.strip()
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", p):
                raise SyntaxErr(f"bad parameter name {p!r}", 1)
            params.append(p)
    if len(set(params)) != len(params):
        raise SemanticErr("duplicate parameter names", 1)

    # (label, indent, text) for nonempty, non-comment body lines
    rows = []
    for idx, raw in enumerate(lines[1:], start=1):
        stripped = raw.split("//", 1)[0].rstrip()
        if not stripped.strip():
            continue
        rows.append((idx, _indent_of(stripped), stripped.strip().rstrip(";").strip()))

    pos = [0]

    def parse_block(min_indent):
        """Parse a run of statements at a common indentation >= min_indent;
        the first row fixes the block's level."""
        if pos[0] >= len(rows) or rows[pos[0]][1] < min_indent:
            return []
        block_indent = rows[pos[0]][1]
        body = []
        while pos[0] < len(rows):
            label, ind, text = rows[pos[0]]
            if ind < block_indent:
                break
            if ind > block_indent:
                raise SyntaxErr("unexpected indentation", label)
            pos[0] += 1
            body.append(parse_stmt(label, block_indent, text))
        return body

    def parse_stmt(label, indent, text):
        toks = _tokenize(text, label)
        if toks and toks[0] == ("name", "if"):
            cond = _parse_paren_or_bare(text[2:], label)
            then_body = parse_block(indent + 1)
            if not then_body:
                raise SyntaxErr("empty 'if' body", label)
            else_body = []
            if pos[0] < len(rows):
                elabel, eind, etext = rows[pos[0]]
                if eind == indent and etext == "else":
                    pos[0] += 1
                    else_body = parse_block(indent + 1)
                    if not else_body:
                        raise SyntaxErr("empty 'else' body", elabel)
            return If(label, cond, then_body, else_body)
        if toks and toks[0] == ("name", "while"):
            cond = _parse_paren_or_bare(text[5:], label)
            body = parse_block(indent + 1)
            if not body:
                raise SyntaxErr("empty 'while' body", label)
            return While(label, cond, body)
        if toks and toks[0] == ("name", "assert"):
            cond = _parse_paren_or_bare(text[6:], label)
            return Assert(label, cond)
        if toks and toks[0] == ("name", "else"):
            raise SyntaxErr("'else' without matching 'if'", label)
        # assignment
        if (len(toks) >= 2 and toks[0][0] == "name" and toks[1] == ("op", "=")):
            target = toks[0][1]
            if target in _KEYWORDS:
                raise SyntaxErr(f"cannot assign to keyword {target!r}", label)
            eq = text.index("=")
            value = parse_expr(text[eq + 1:], label)
            return Assign(label, target, value)
        raise SyntaxErr(f"cannot parse statement {text!r}", label)

    def _parse_paren_or_bare(rest, label):
        return parse_expr(rest, label)

    body = parse_block(0)
    if pos[0] < len(rows):
        raise SyntaxErr("unexpected statement after program end", rows[pos[0]][0])

    prog = MiniImpProgram(name=name, params=list(params), body=body)
    for st in iter_stmts(body):
        prog.stmts[st.label] = st
    check_program(prog)
    return prog


def check_program(prog):
    """Enforce MiniImp well-formedness: exactly one assert, placed as the
    final top-level statement; every use dominated by a definition on all
    paths; variable names must not end in a digit (SSA versions append one).
    """
    asserts = [st for st in iter_stmts(prog.body) if isinstance(st, Assert)]
    if len(asserts) != 1:
        raise SemanticErr(f"program must contain exactly one assert, found {len(asserts)}")
    if not prog.body or not isinstance(prog.body[-1], Assert):
        raise SemanticErr("the assert must be the final top-level statement",
                          asserts[0].label)

    for st in iter_stmts(prog.body):
        for v in _stmt_var_names(st):
            if re.search(r"\d$", v):
                raise SemanticErr(
                    f"variable name {v!r} must not end in a digit", st.label)

    def check_block(body, defined):
        defined = set(defined)
        for st in body:
            if isinstance(st, Assign):
                _check_uses(st.value, defined, st.label)
                defined.add(st.target)
            elif isinstance(st, If):
                _check_uses(st.cond, defined, st.label)
                d1 = check_block(st.then_body, defined)
                d2 = check_block(st.else_body, defined)
                defined = d1 & d2
            elif isinstance(st, While):
                _check_uses(st.cond, defined, st.label)
                check_block(st.body, defined)
                # body may not execute: defs inside don't escape
            elif isinstance(st, Assert):
                _check_uses(st.cond, defined, st.label)
        return defined

    check_block(prog.body, set(prog.params))


def _check_uses(expr, defined, label):
    for v in expr_vars(expr):
        if v not in defined:
            raise SemanticErr(f"variable {v!r} used before definition", label)


def _stmt_var_names(st):
    names = set()
    if isinstance(st, Assign):
        names.add(st.target)
        names |= expr_vars(st.value)
    elif isinstance(st, (If, While, Assert)):
        names |= expr_vars(st.cond)
    return names


def attach_assert(prog, predicate):
    """Return a copy of `prog` with its final assert replaced by `predicate`.

    If `prog` carries a placeholder assert (or the harness wants a
    test-specific postcondition), this is how the test harness installs it.
    `predicate` may be an expression or source text.
    """
    if isinstance(predicate, str):
        predicate = parse_expr(predicate)
    new_body = list(prog.body)
    old = new_body[-1]
    if not isinstance(old, Assert):
        raise SemanticErr("program does not end with an assert")
    new_body[-1] = Assert(old.label, predicate)
    out = MiniImpProgram(name=prog.name, params=list(prog.params), body=new_body)
    for st in iter_stmts(new_body):
        out.stmts[st.label] = st
    check_program(out)
    return out


# ---------------------------------------------------------------------------
# Pretty printer

def pretty(prog):
    """Render a program back to canonical MiniImp source.

    Blank filler lines keep every statement on its original body line so
    parse(pretty(p)) reproduces the labels.
    """
    out_lines = {}

    def emit(body, indent):
        for st in body:
            pad = "  " * indent
            if isinstance(st, Assign):
                out_lines[st.label] = f"{pad}{st.target} = {expr_to_str(st.value)}"
            elif isinstance(st, If):
                out_lines[st.label] = f"{pad}if {expr_to_str(st.cond)}"
                emit(st.then_body, indent + 1)
                if st.else_body:
                    else_line = min(s.label for s in st.else_body) - 1
                    out_lines[else_line] = f"{pad}else"
                    emit(st.else_body, indent + 1)
            elif isinstance(st, While):
                out_lines[st.label] = f"{pad}while {expr_to_str(st.cond)}"
                emit(st.body, indent + 1)
            elif isinstance(st, Assert):
                out_lines[st.label] = f"{pad}assert {expr_to_str(st.cond)}"

    emit(prog.body, 0)
    last = max(out_lines) if out_lines else 0
    header = f"prog {prog.name}({', '.join(prog.params)})"
    return "\n".join([header] + [out_lines.get(i, "") for i in range(1, last + 1)]) + "\n"
