"""Bit-level encoding of integer/boolean constraints into CNF.

Semantics match the interpreter exactly: declared variables are width-W
two's-complement values, arithmetic never wraps (result widths grow), and
comparisons are signed over the exact values.
"""

from __future__ import annotations

from . import lang
from .cdcl import CnfSolver


class BlastError(Exception):
    pass


class CnfBuilder:
    """CNF construction with Tseitin gates and named bit-vector variables.

    Variable 1 is reserved as the constant TRUE.
    """

    def __init__(self, universe):
        """universe: name -> ("int", width) or ("bool",)."""
        self.solver = CnfSolver()
        self.universe = dict(universe)
        self.TRUE = self.solver.new_var()
        self.solver.add_clause([self.TRUE])
        self.FALSE = -self.TRUE
        self._bits = {}  # name -> list of literals (ints) or single literal (bools)
        self._gate_cache = {}

    def add_clause(self, cl):
        self.solver.add_clause(cl)

    def new_lit(self):
        return self.solver.new_var()

    # -- named variables ----------------------------------------------------

    def int_bits(self, name):
        if name not in self._bits:
            spec = self.universe.get(name)
            if spec is None or spec[0] != "int":
                raise BlastError(f"unknown integer variable {name!r}")
            width = spec[1]
            self._bits[name] = [self.new_lit() for _ in range(width)]
        return self._bits[name]

    def bool_lit(self, name):
        if name not in self._bits:
            spec = self.universe.get(name)
            if spec is None or spec[0] != "bool":
                raise BlastError(f"unknown boolean variable {name!r}")
            self._bits[name] = self.new_lit()
        return self._bits[name]

    # -- gates (with constant folding) --------------------------------------

    def g_not(self, a):
        return -a

    def g_and(self, a, b):
        if a == self.FALSE or b == self.FALSE:
            return self.FALSE
        if a == self.TRUE:
            return b
        if b == self.TRUE:
            return a
        if a == b:
            return a
        if a == -b:
            return self.FALSE
        key = ("and", *sorted((a, b)))
        if key in self._gate_cache:
            return self._gate_cache[key]
        o = self.new_lit()
        self.add_clause([-o, a])
        self.add_clause([-o, b])
        self.add_clause([o, -a, -b])
        self._gate_cache[key] = o
        return o

    def g_or(self, a, b):
        return -self.g_and(-a, -b)

    def g_xor(self, a, b):
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == self.TRUE:
            return -b
        if b == self.TRUE:
            return -a
        if a == b:
            return self.FALSE
        if a == -b:
            return self.TRUE
        key = ("xor", *sorted((abs(a), abs(b)))), (a > 0) == (b > 0)
        if key in self._gate_cache:
            return self._gate_cache[key]
        o = self.new_lit()
        self.add_clause([-o, a, b])
        self.add_clause([-o, -a, -b])
        self.add_clause([o, -a, b])
        self.add_clause([o, a, -b])
        self._gate_cache[key] = o
        return o

    def g_iff(self, a, b):
        return -self.g_xor(a, b)

    def g_ite(self, c, t, f):
        return self.g_or(self.g_and(c, t), self.g_and(-c, f))

    def g_and_all(self, lits):
        out = self.TRUE
        for l in lits:
            out = self.g_and(out, l)
        return out

    def g_or_all(self, lits):
        out = self.FALSE
        for l in lits:
            out = self.g_or(out, l)
        return out

    # -- bit-vector arithmetic (LSB first, two's complement) ----------------

    def const_bits(self, value):
        width = max(int(value).bit_length() + 1, 1)
        return [self.TRUE if (value >> i) & 1 else self.FALSE
                for i in range(width)]

    def sign_extend(self, bits, width):
        if len(bits) >= width:
            return bits[:width] if len(bits) == width else bits
        return bits + [bits[-1]] * (width - len(bits))

    def bv_add(self, a, b):
        """Exact sum: result width max(wa, wb) + 1, no overflow possible."""
        w = max(len(a), len(b)) + 1
        a = self.sign_extend(a, w)
        b = self.sign_extend(b, w)
        out = []
        carry = self.FALSE
        for i in range(w):
            s = self.g_xor(self.g_xor(a[i], b[i]), carry)
            carry = self.g_or(self.g_and(a[i], b[i]),
                              self.g_and(carry, self.g_xor(a[i], b[i])))
            out.append(s)
        return out

    def bv_neg(self, a):
        w = len(a) + 1
        inv = [-l for l in self.sign_extend(a, w)]
        out = []
        carry = self.TRUE  # +1
        for i in range(w):
            s = self.g_xor(inv[i], carry)
            carry = self.g_and(inv[i], carry)
            out.append(s)
        return out

    def bv_sub(self, a, b):
        return self.bv_add(a, self.bv_neg(b))

    def bv_mul(self, a, b):
        """Exact product: computed modulo 2**(wa+wb), which the true product
        always fits in."""
        w = len(a) + len(b)
        a = self.sign_extend(a, w)
        b = self.sign_extend(b, w)
        acc = [self.FALSE] * w
        for i in range(w):
            bi = b[i]
            if bi == self.FALSE:
                continue
            # acc += (a << i) under control bi, modulo 2^w
            carry = self.FALSE
            for j in range(i, w):
                aj = self.g_and(a[j - i], bi)
                s = self.g_xor(self.g_xor(acc[j], aj), carry)
                carry = self.g_or(self.g_and(acc[j], aj),
                                  self.g_and(carry, self.g_xor(acc[j], aj)))
                acc[j] = s
        return acc

    def bv_eq(self, a, b):
        w = max(len(a), len(b))
        a = self.sign_extend(a, w)
        b = self.sign_extend(b, w)
        return self.g_and_all(self.g_iff(x, y) for x, y in zip(a, b))

    def bv_lt(self, a, b):
        """Signed less-than."""
        w = max(len(a), len(b))
        a = list(self.sign_extend(a, w))
        b = list(self.sign_extend(b, w))
        # flip sign bits, compare unsigned
        a[-1] = -a[-1]
        b[-1] = -b[-1]
        lt = self.FALSE
        for i in range(w):
            lt = self.g_or(self.g_and(-a[i], b[i]),
                           self.g_and(self.g_iff(a[i], b[i]), lt))
        return lt

    # -- expression encoding ------------------------------------------------

    def encode_int(self, e):
        if isinstance(e, lang.Num):
            return self.const_bits(e.value)
        if isinstance(e, lang.Var):
            return self.int_bits(e.name)
        if isinstance(e, lang.BinOp):
            a = self.encode_int(e.left)
            b = self.encode_int(e.right)
            if e.op == "+":
                return self.bv_add(a, b)
            if e.op == "-":
                return self.bv_sub(a, b)
            if e.op == "*":
                if len(a) + len(b) > 512:
                    raise BlastError("product width exceeds 512 bits")
                return self.bv_mul(a, b)
        raise BlastError(f"not an integer expression: {e!r}")

    def encode_bool(self, e):
        if isinstance(e, lang.BoolLit):
            return self.TRUE if e.value else self.FALSE
        if isinstance(e, lang.GuardVar):
            return self.bool_lit(e.name)
        if isinstance(e, lang.Not):
            return -self.encode_bool(e.arg)
        if isinstance(e, lang.BoolOp):
            a = self.encode_bool(e.left)
            b = self.encode_bool(e.right)
            return self.g_and(a, b) if e.op == "&&" else self.g_or(a, b)
        if isinstance(e, lang.Iff):
            return self.g_iff(self.encode_bool(e.left), self.encode_bool(e.right))
        if isinstance(e, lang.Cmp):
            a = self.encode_int(e.left)
            b = self.encode_int(e.right)
            if e.op == "==":
                return self.bv_eq(a, b)
            if e.op == "!=":
                return -self.bv_eq(a, b)
            if e.op == "<":
                return self.bv_lt(a, b)
            if e.op == ">":
                return self.bv_lt(b, a)
            if e.op == "<=":
                return -self.bv_lt(b, a)
            if e.op == ">=":
                return -self.bv_lt(a, b)
        raise BlastError(f"not a boolean expression: {e!r}")

    def assert_true(self, lit):
        self.add_clause([lit])

    # -- cardinality --------------------------------------------------------

    def at_most_k(self, lits, k):
        """Sequential-counter encoding of sum(lits) <= k."""
        lits = list(lits)
        n = len(lits)
        if k >= n:
            return
        if k == 0:
            for l in lits:
                self.add_clause([-l])
            return
        # registers r[i][j]: among first i+1 lits at least j+1 are true
        prev = None
        for i, x in enumerate(lits):
            cur = [self.new_lit() for _ in range(min(i + 1, k))]
            self.add_clause([-x, cur[0]])
            if prev is not None:
                for j in range(len(prev)):
                    if j < len(cur):
                        self.add_clause([-prev[j], cur[j]])
                    if j + 1 < len(cur):
                        self.add_clause([-x, -prev[j], cur[j + 1]])
                if len(prev) == k:
                    self.add_clause([-x, -prev[k - 1]])
            prev = cur

    # -- model decoding -----------------------------------------------------

    def decode(self, model):
        """Model (var -> bool) back to named values; every universe name is
        assigned (unconstrained variables default to their solver values or
        zero/false)."""
        out = {}
        for name, spec in self.universe.items():
            if spec[0] == "bool":
                lit = self._bits.get(name)
                out[name] = self._lit_val(model, lit) if lit is not None else False
            else:
                bits = self._bits.get(name)
                if bits is None:
                    out[name] = 0
                    continue
                val = 0
                for i, l in enumerate(bits):
                    if self._lit_val(model, l):
                        val |= 1 << i
                if self._lit_val(model, bits[-1]):
                    val -= 1 << len(bits)
                out[name] = val
        return out

    def _lit_val(self, model, lit):
        if lit == self.TRUE:
            return True
        if lit == self.FALSE:
            return False
        v = model[abs(lit)]
        return v if lit > 0 else not v

    def solve(self, max_conflicts=10_000_000):
        return self.solver.solve(max_conflicts)
