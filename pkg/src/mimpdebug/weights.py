"""Statistical suspiciousness (Ochiai) and clause weighting.

susp(e) = ef / sqrt(F * (ef + ep)) over failing/passing coverage counts;
clause weight is the reciprocal, so suspicious clauses are cheap to drop.
Entities never covered by a failing test get suspiciousness 0 and the top
weight (strictly above the sum of all finite weights), so the solver drops
them only when nothing else works.

Weights are exact rationals: square roots are taken with integer isqrt at
fixed scale, which is exact whenever the radicand is a perfect square and
deterministic (and order-preserving) otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import isqrt


class WeightsError(Exception):
    pass


class _TopWeight:
    """Sentinel: largest possible weight (realized per instance)."""

    def __repr__(self):
        return "top"


TOP = _TopWeight()

_SQRT_SCALE = 10 ** 24


def sqrt_fraction(n):
    """Deterministic rational sqrt of a nonnegative integer; exact for
    perfect squares."""
    if n < 0:
        raise ValueError("negative radicand")
    return Fraction(isqrt(n * _SQRT_SCALE * _SQRT_SCALE), _SQRT_SCALE)


@dataclass
class CoverageRow:
    test_id: str
    outcome: str  # "pass" | "fail"
    stmts: frozenset  # covered statement labels (ints)
    branches: frozenset = frozenset()  # covered (cond label, polarity)


@dataclass
class CoverageMatrix:
    rows: list

    def __post_init__(self):
        if not self.rows:
            raise WeightsError("empty coverage matrix")
        if not any(r.outcome == "fail" for r in self.rows):
            raise WeightsError("coverage matrix has no failing test")


def ochiai(cov):
    """Suspiciousness per statement label, in [0, 1]."""
    fails = [r for r in cov.rows if r.outcome == "fail"]
    passes = [r for r in cov.rows if r.outcome == "pass"]
    total_f = len(fails)
    labels = set()
    for r in cov.rows:
        labels |= r.stmts
    susp = {}
    for e in sorted(labels):
        ef = sum(1 for r in fails if e in r.stmts)
        ep = sum(1 for r in passes if e in r.stmts)
        if ef == 0:
            susp[e] = Fraction(0)
        else:
            susp[e] = Fraction(ef) / sqrt_fraction(total_f * (ef + ep))
    return susp


def weight_of(susp_value):
    """weight = 1 / susp; zero suspiciousness maps to the top weight."""
    if susp_value == 0:
        return TOP
    return 1 / Fraction(susp_value)


def to_weights(susp, formula, base_label=None):
    """Attach weights to the soft statement clauses of a trace formula.

    `base_label` maps clause origins (SSA labels) to the statement labels
    used in the coverage matrix; identity by default. Hard clauses are
    untouched. Returns id -> weight for the soft clauses.
    """
    out = {}
    for c in formula.clauses.values():
        if c.hard:
            continue
        origin = c.origin if base_label is None else base_label(c.origin)
        s = susp.get(origin, Fraction(0))
        out[c.id] = weight_of(s)
    return out


def apply_weights(clauses, weight_map):
    """Return clauses with weights from `weight_map` installed."""
    out = []
    for c in clauses:
        if not c.hard and c.id in weight_map:
            out.append(replace(c, weight=weight_map[c.id]))
        else:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Coverage matrix persistence (line-oriented text)

def coverage_to_text(cov):
    lines = []
    for r in cov.rows:
        stmts = ",".join(str(s) for s in sorted(r.stmts))
        branches = ",".join(f"{c}:{'T' if p else 'F'}"
                            for c, p in sorted(r.branches))
        lines.append("\t".join([r.test_id, r.outcome, stmts, branches]))
    return "\n".join(lines) + "\n"


def coverage_from_text(text):
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise WeightsError(f"bad coverage line {line!r}")
        test_id, outcome, stmts = parts[0], parts[1], parts[2]
        branches = parts[3] if len(parts) > 3 else ""
        if outcome not in ("pass", "fail"):
            raise WeightsError(f"bad outcome {outcome!r}")
        stmt_set = frozenset(int(s) for s in stmts.split(",") if s)
        br_set = frozenset(
            (int(b.split(":")[0]), b.split(":")[1] == "T")
            for b in branches.split(",") if b)
        rows.append(CoverageRow(test_id, outcome, stmt_set, br_set))
    return CoverageMatrix(rows)
