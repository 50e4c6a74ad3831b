"""Non-dominated sorting against a brute-force dominance oracle."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysolve.errors import EmptyInput, NonFiniteObjective, UnknownObjective
from sysolve.explore import SweepRecord
from sysolve.pareto import orient_objectives, pareto_front


def brute_force_front(points):
    """O(n^2) pairwise weak-dominance oracle: ids of non-dominated points."""
    front = []
    for pid, a, b in points:
        dominated = any(
            (oa <= a and ob <= b and (oa < a or ob < b))
            for _, oa, ob in points
        )
        if not dominated:
            front.append(pid)
    return set(front)


def rank1_ids(ranked):
    return {p.point_id for p in ranked if p.rank == 1}


class TestExamples:
    def test_strict_dominance(self):
        ranked = pareto_front([("p", 1, 1), ("q", 2, 2)])
        assert rank1_ids(ranked) == {"p"}
        assert {p.point_id: p.rank for p in ranked}["q"] == 2

    def test_incomparable_pair(self):
        ranked = pareto_front([("p", 1, 2), ("q", 2, 1)])
        assert rank1_ids(ranked) == {"p", "q"}

    def test_colocated_points_share_rank_one(self):
        ranked = pareto_front([("p", 1, 1), ("q", 1, 1)])
        assert rank1_ids(ranked) == {"p", "q"}

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            pareto_front([])

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteObjective):
            pareto_front([("p", math.inf, 1)])

    def test_every_point_ranked(self):
        points = [("a", 1, 5), ("b", 5, 1), ("c", 2, 2), ("d", 6, 6), ("e", 3, 3)]
        ranked = pareto_front(points)
        assert sorted(p.rank for p in ranked) == [1, 1, 1, 2, 3]


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(8))
    def test_random_sets(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 400)
        points = [
            (i, rng.randint(0, 50), rng.randint(0, 50)) for i in range(n)
        ]
        assert rank1_ids(pareto_front(points)) == brute_force_front(points)

    def test_idempotence(self):
        rng = random.Random(99)
        points = [(i, rng.random(), rng.random()) for i in range(200)]
        front = [p for p in pareto_front(points) if p.rank == 1]
        again = pareto_front([(p.point_id, p.obj_a, p.obj_b) for p in front])
        assert all(p.rank == 1 for p in again)

    @given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)),
                    min_size=1, max_size=60))
    def test_monotone_transform_invariance(self, pairs):
        points = [(i, a, b) for i, (a, b) in enumerate(pairs)]
        # Strictly increasing maps on each objective independently.
        transformed = [(i, 3 * a + 1, b * b + b) for i, a, b in points]
        assert rank1_ids(pareto_front(points)) == rank1_ids(pareto_front(transformed))


def _record(h, w, cycles, utilization):
    return SweepRecord(
        model_name="m", height=h, width=w, cycles=cycles,
        utilization=Fraction(utilization), energy=Fraction(9),
        m_ub=0, m_inter_pe=0, m_intra_pe=0, m_aa=0, stall_cycles=0,
        peak_weight_words_per_cycle=Fraction(0),
    )


class TestOrientObjectives:
    def test_identity_mapping(self):
        [(pid, a, b)] = orient_objectives(
            [_record(4, 8, cycles=7, utilization="1/2")], ("cycles", "energy")
        )
        assert pid == (4, 8)
        assert (a, b) == (7, 9)

    def test_utilization_complement(self):
        [(_, _, b)] = orient_objectives(
            [_record(4, 8, cycles=7, utilization="3/4")], ("cycles", "utilization")
        )
        assert b == Fraction(1, 4)

    def test_unknown_objective(self):
        with pytest.raises(UnknownObjective):
            orient_objectives([_record(4, 8, 7, "1/2")], ("cycles", "latency2"))
