"""Satisfiability checking and minimal-correction-subset enumeration.

A MaxSatInstance pairs hard clauses (inputs, assertion, phi definitions)
with droppable soft clauses. CoMSS enumeration walks correction-set sizes
upward; each stage asks the SAT core for an assignment violating at most k
soft clauses, with previously found CoMSSs blocked by requiring at least
one of their members satisfied (which also blocks all supersets, so every
reported set is minimal).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import cdcl, encoder, lang
from .bitblast import CnfBuilder


class SolverError(Exception):
    pass


class MalformedInstanceError(SolverError):
    """Hard clauses alone are unsatisfiable."""


class SolverLimitError(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


@dataclass
class SatResult:
    status: str  # "sat" | "unsat" | "timeout"
    model: dict = None  # name -> value, total on the universe (sat only)

    @property
    def is_sat(self):
        return self.status == "sat"


def sat(constraints, universe, max_conflicts=10_000_000):
    """Decide a conjunction of constraints; sound and complete for the
    given widths. Budget exhaustion is an explicit timeout result."""
    b = CnfBuilder(universe)
    for c in constraints:
        b.assert_true(b.encode_bool(c))
    status, model = b.solve(max_conflicts)
    if status == cdcl.SAT:
        return SatResult("sat", b.decode(model))
    if status == cdcl.UNSAT:
        return SatResult("unsat")
    return SatResult("timeout")


@dataclass
class MaxSatInstance:
    hard: list  # Clause
    soft: list  # Clause (weights used in weighted mode)
    universe: dict  # name -> ("int", width) | ("bool",)
    declared_width: int = None

    def clause_by_id(self, cid):
        for c in itertools.chain(self.hard, self.soft):
            if c.id == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class CoMss:
    clause_ids: frozenset
    mss_weight: Fraction = None

    def __len__(self):
        return len(self.clause_ids)

    def sorted_ids(self):
        return tuple(sorted(self.clause_ids))


class CoMssList(list):
    """Enumeration result; `complete` is False when the budget ran out."""

    complete = True


def _finite_weights(instance):
    """Realize weights as Fractions; the top weight is strictly greater
    than the sum of all finite weights."""
    from .weights import TOP

    finite_sum = Fraction(0)
    for c in instance.soft:
        w = c.weight
        if w is not None and w is not TOP:
            finite_sum += Fraction(w)
    top = finite_sum + 1
    out = {}
    for c in instance.soft:
        w = c.weight
        if w is None:
            out[c.id] = Fraction(1)
        elif w is TOP:
            out[c.id] = top
        else:
            out[c.id] = Fraction(w)
    return out


def enumerate_comss(instance, max_comss_size, mode="plain",
                    max_conflicts=10_000_000):
    """All distinct CoMSSs of size <= max_comss_size.

    Weighted mode orders by decreasing complementary-MSS weight, ties by
    increasing CoMSS size, then lexicographic clause ids; plain mode keeps
    discovery order (by size). Identical instances yield identical output.
    """
    hard_exprs = [c.constraint for c in instance.hard]
    res = sat(hard_exprs, instance.universe, max_conflicts)
    if res.status == "timeout":
        raise SolverTimeout("hard-clause satisfiability check timed out")
    if not res.is_sat:
        raise MalformedInstanceError(
            "hard clauses are unsatisfiable (inconsistent input/assertion)")

    weights = _finite_weights(instance)
    total_weight = sum(weights.values())

    soft = list(instance.soft)
    found = CoMssList()

    full = sat(hard_exprs + [c.constraint for c in instance.soft],
               instance.universe, max_conflicts)
    if full.is_sat:
        return found

    for k in range(1, max_comss_size + 1):
        while True:
            b = CnfBuilder(instance.universe)
            for e in hard_exprs:
                b.assert_true(b.encode_bool(e))
            selectors = {}
            for c in soft:
                t = b.encode_bool(c.constraint)
                s = b.new_lit()
                b.add_clause([-s, t])
                b.add_clause([s, -t])
                selectors[c.id] = s
            b.at_most_k([-s for s in selectors.values()], k)
            for comss in found:
                b.add_clause([selectors[i] for i in comss.clause_ids])
            status, model = b.solve(max_conflicts)
            if status == cdcl.UNDECIDED:
                found.complete = False
                return _order(found, mode)
            if status == cdcl.UNSAT:
                break
            dropped = frozenset(
                cid for cid, s in selectors.items()
                if not _sel_val(model, s))
            mss_w = total_weight - sum(weights[i] for i in dropped)
            found.append(CoMss(clause_ids=dropped, mss_weight=mss_w))
    return _order(found, mode)


def _sel_val(model, lit):
    v = model[abs(lit)]
    return v if lit > 0 else not v


def _order(found, mode):
    if mode == "weighted":
        ordered = CoMssList(sorted(
            found, key=lambda c: (-c.mss_weight, len(c), c.sorted_ids())))
        ordered.complete = found.complete
        return ordered
    return found


# ---------------------------------------------------------------------------
# Independent oracle

def brute_force_comss(instance, max_comss_size, max_conflicts=10_000_000):
    """Ground-truth CoMSS enumeration by explicit subset search.

    Refuses instances outside exhaustive-feasibility limits. Checks
    correction and minimality of every candidate with direct sat calls.
    """
    if len(instance.soft) > 20:
        raise SolverLimitError("brute force limited to 20 soft clauses")
    if instance.declared_width is not None and instance.declared_width > 8:
        raise SolverLimitError("brute force limited to width 8")

    hard_exprs = [c.constraint for c in instance.hard]
    res = sat(hard_exprs, instance.universe, max_conflicts)
    if not res.is_sat:
        raise MalformedInstanceError("hard clauses are unsatisfiable")

    by_id = {c.id: c for c in instance.soft}
    ids = sorted(by_id)
    weights = _finite_weights(instance)
    total_weight = sum(weights.values())

    def is_sat_without(dropped, extra=()):
        kept = [by_id[i].constraint for i in ids if i not in dropped]
        kept += [by_id[i].constraint for i in extra]
        r = sat(hard_exprs + kept, instance.universe, max_conflicts)
        if r.status == "timeout":
            raise SolverTimeout("oracle sat call timed out")
        return r.is_sat

    if is_sat_without(frozenset()):
        return CoMssList()

    found = CoMssList()
    for size in range(1, max_comss_size + 1):
        for combo in itertools.combinations(ids, size):
            dropped = frozenset(combo)
            if any(f.clause_ids <= dropped for f in found):
                continue  # superset of a known CoMSS: not minimal
            if not is_sat_without(dropped):
                continue
            # minimality: adding back any dropped clause must break it
            minimal = all(not is_sat_without(dropped, extra=(c,))
                          for c in combo)
            if minimal:
                mss_w = total_weight - sum(weights[i] for i in dropped)
                found.append(CoMss(clause_ids=dropped, mss_weight=mss_w))
    return found


# ---------------------------------------------------------------------------
# Instance dump/load (textual exchange format)

def instance_to_text(instance):
    lines = []
    if instance.declared_width is not None:
        lines.append(f"width\t{instance.declared_width}")
    for name, spec in instance.universe.items():
        if spec[0] == "int":
            lines.append(f"var\t{name}\tint\t{spec[1]}")
        else:
            lines.append(f"var\t{name}\tbool")
    for c in itertools.chain(instance.hard, instance.soft):
        lines.append("clause\t" + encoder.clause_to_line(c))
    return "\n".join(lines) + "\n"


def instance_from_text(text):
    universe = {}
    hard, soft = [], []
    width = None
    for line in text.splitlines():
        line = line.strip("\n")
        if not line.strip():
            continue
        kind, _, rest = line.partition("\t")
        if kind == "width":
            width = int(rest)
        elif kind == "var":
            parts = rest.split("\t")
            if parts[1] == "int":
                universe[parts[0]] = ("int", int(parts[2]))
            else:
                universe[parts[0]] = ("bool",)
        elif kind == "clause":
            c = encoder.clause_from_line(rest)
            (hard if c.hard else soft).append(c)
        else:
            raise SolverError(f"bad instance line {line!r}")
    return MaxSatInstance(hard=hard, soft=soft, universe=universe,
                          declared_width=width)
