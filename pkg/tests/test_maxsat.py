"""MaxSAT layer: sat(), CoMSS enumeration vs the brute-force oracle."""

import random
from fractions import Fraction

import pytest

from mimpdebug import encoder, lang, maxsat
from mimpdebug.weights import TOP

import _gen


def clause(cid, src, hard=False, weight=None):
    return encoder.Clause(id=cid, kind=encoder.ASSIGN,
                          constraint=lang.parse_expr(src),
                          origin=f"c{cid}", hard=hard, weight=weight)


UNIV = {"a": ("int", 4), "b": ("int", 4)}


def instance(hard, soft):
    return maxsat.MaxSatInstance(hard=hard, soft=soft, universe=UNIV,
                                 declared_width=4)


def id_sets(comsses):
    return {c.clause_ids for c in comsses}


class TestSat:
    def test_sat_with_model(self):
        res = maxsat.sat([lang.parse_expr("a + b == 3"),
                          lang.parse_expr("a > b")], UNIV)
        assert res.is_sat
        assert res.model["a"] + res.model["b"] == 3
        assert res.model["a"] > res.model["b"]

    def test_unsat(self):
        res = maxsat.sat([lang.parse_expr("a < b"),
                          lang.parse_expr("b < a")], UNIV)
        assert res.status == "unsat"


class TestEnumerate:
    def test_satisfiable_instance_has_no_comss(self):
        inst = instance([clause(1, "a == 1", hard=True)],
                        [clause(2, "b == 2"), clause(3, "a < b")])
        assert maxsat.enumerate_comss(inst, 5) == []

    def test_single_conflicting_clause(self):
        inst = instance([clause(1, "a == 1", hard=True)],
                        [clause(2, "a == 2"), clause(3, "b == 0")])
        out = maxsat.enumerate_comss(inst, 5)
        assert id_sets(out) == {frozenset({2})}

    def test_both_conflicting_softs_dropped_together(self):
        # each soft clause alone contradicts the hard one, so the only
        # correction is dropping both
        inst = instance([clause(1, "a == 0", hard=True)],
                        [clause(2, "a == 1"), clause(3, "a == 2")])
        out = maxsat.enumerate_comss(inst, 5)
        assert id_sets(out) == {frozenset({2, 3})}

    def test_pair_comss(self):
        # the two soft clauses conflict with each other, not individually
        inst = instance([],
                        [clause(1, "a < b"), clause(2, "b < a")])
        out = maxsat.enumerate_comss(inst, 5)
        assert id_sets(out) == {frozenset({1}), frozenset({2})}

    def test_size_bound_respected(self):
        # only correction set has size 2; bound 1 must return nothing
        inst = instance([clause(1, "a == 0", hard=True)],
                        [clause(2, "a == 1"), clause(3, "a == 1")])
        out1 = maxsat.enumerate_comss(inst, 1)
        assert out1 == []
        out2 = maxsat.enumerate_comss(inst, 2)
        assert id_sets(out2) == {frozenset({2, 3})}

    def test_no_returned_set_is_superset_of_another(self):
        rng = random.Random(1)
        for _ in range(20):
            inst = _gen.gen_instance(rng)
            out = maxsat.enumerate_comss(inst, 4)
            sets = [c.clause_ids for c in out]
            for i, s in enumerate(sets):
                for j, t in enumerate(sets):
                    assert i == j or not (s < t)

    def test_unsat_hard_clauses_rejected(self):
        inst = instance([clause(1, "a == 0", hard=True),
                         clause(2, "a == 1", hard=True)],
                        [clause(3, "b == 0")])
        with pytest.raises(maxsat.MalformedInstanceError):
            maxsat.enumerate_comss(inst, 5)

    def test_deterministic(self):
        rng = random.Random(2)
        inst = _gen.gen_instance(rng)
        a = maxsat.enumerate_comss(inst, 4)
        b = maxsat.enumerate_comss(inst, 4)
        assert [c.clause_ids for c in a] == [c.clause_ids for c in b]


class TestAgainstBruteForce:
    @pytest.mark.parametrize("seed", range(25))
    def test_plain_matches(self, seed):
        rng = random.Random(1000 + seed)
        inst = _gen.gen_instance(rng)
        fast = maxsat.enumerate_comss(inst, 3)
        slow = maxsat.brute_force_comss(inst, 3)
        assert id_sets(fast) == id_sets(slow)

    @pytest.mark.parametrize("seed", range(15))
    def test_weighted_order(self, seed):
        rng = random.Random(2000 + seed)
        inst = _gen.gen_instance(rng, weighted=True)
        fast = maxsat.enumerate_comss(inst, 3, mode="weighted")
        slow = maxsat.brute_force_comss(inst, 3)
        assert id_sets(fast) == id_sets(slow)
        weights = [c.mss_weight for c in fast]
        assert weights == sorted(weights, reverse=True)

    def test_mss_weight_values(self):
        # the two soft clauses conflict with each other; either is a CoMSS
        w2, w3 = Fraction(5), Fraction(1, 2)
        inst = instance([],
                        [clause(2, "a == 1", weight=w2),
                         clause(3, "a == 2", weight=w3)])
        out = maxsat.enumerate_comss(inst, 5, mode="weighted")
        by_ids = {c.clause_ids: c.mss_weight for c in out}
        total = w2 + w3
        assert by_ids[frozenset({2})] == total - w2
        assert by_ids[frozenset({3})] == total - w3
        # dropping the cheap clause preserves more weight: reported first
        assert out[0].clause_ids == frozenset({3})


class TestOracleLimits:
    def test_brute_force_refuses_large_instances(self):
        soft = [clause(i, "a == 0") for i in range(2, 25)]
        inst = instance([], soft)
        with pytest.raises(maxsat.SolverLimitError):
            maxsat.brute_force_comss(inst, 2)

    def test_brute_force_refuses_wide_instances(self):
        inst = maxsat.MaxSatInstance(
            hard=[], soft=[clause(1, "a == 0")],
            universe={"a": ("int", 16)}, declared_width=16)
        with pytest.raises(maxsat.SolverLimitError):
            maxsat.brute_force_comss(inst, 2)


class TestInstanceSerialization:
    def test_roundtrip(self):
        rng = random.Random(3)
        inst = _gen.gen_instance(rng, weighted=True)
        text = maxsat.instance_to_text(inst)
        again = maxsat.instance_from_text(text)
        assert again.universe == inst.universe
        assert again.declared_width == inst.declared_width
        assert [c.id for c in again.soft] == [c.id for c in inst.soft]
        out1 = maxsat.enumerate_comss(inst, 3)
        out2 = maxsat.enumerate_comss(again, 3)
        assert id_sets(out1) == id_sets(out2)
