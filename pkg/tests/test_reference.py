"""Event-driven reference simulator and its agreement with the closed form.

The exhaustive oracle grid required by the acceptance suite lives in
test_acceptance.py; here a sampled slice keeps the unit run fast.
"""

import itertools
import random

import numpy as np
import pytest

from sysolve.core import ArrayConfig, emulate_gemm
from sysolve.errors import BitwidthOverflow
from sysolve.reference import reference_simulate
from sysolve.workloads import GemmWorkload


def triple_loop_matmul(lhs, rhs):
    """Textbook O(m*k*n) product, used as the functional oracle."""
    m, k = len(lhs), len(lhs[0])
    n = len(rhs[0])
    out = [[0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            for x in range(k):
                out[i][j] += lhs[i][x] * rhs[x][j]
    return out


class TestHandTraces:
    def test_single_pe_single_mac(self):
        report = reference_simulate(GemmWorkload(m=1, k=1, n=1), ArrayConfig(1, 1))
        # 1 exposed load cycle, 1 MAC cycle, 1 accumulator-transfer cycle.
        assert report.counters.cycles == 3
        assert report.counters.macs == 1

    def test_2x2_wavefront(self):
        report = reference_simulate(GemmWorkload(m=4, k=2, n=2), ArrayConfig(2, 2))
        assert report.counters.cycles == 9
        assert report.counters.m_aa == 8


class TestFunctionalCorrectness:
    def test_random_3x3_integers(self):
        rng = random.Random(42)
        for _ in range(10):
            lhs = [[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]
            rhs = [[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]
            report = reference_simulate(
                GemmWorkload(m=3, k=3, n=3), ArrayConfig(2, 2),
                np.array(lhs), np.array(rhs),
            )
            assert report.output.tolist() == triple_loop_matmul(lhs, rhs)

    def test_overflow_raised_like_analytic(self):
        workload = GemmWorkload(m=1, k=2, n=1)
        cfg = ArrayConfig(1, 1, accumulator_bits=8)
        lhs = np.array([[100, 100]])
        rhs = np.array([[1], [1]])
        with pytest.raises(BitwidthOverflow):
            reference_simulate(workload, cfg, lhs, rhs)
        with pytest.raises(BitwidthOverflow):
            emulate_gemm(workload, cfg, lhs, rhs)


class TestOracleEquivalence:
    @pytest.mark.parametrize("h,w", list(itertools.product((1, 2, 4), (1, 3, 4))))
    def test_sampled_grid(self, h, w):
        rng = random.Random(h * 10 + w)
        for m, k, n in itertools.product((1, 2, 5), repeat=3):
            for depth in (1, 2, 8):
                workload = GemmWorkload(m=m, k=k, n=n, repeat=rng.choice((1, 2)))
                cfg = ArrayConfig(h, w, accumulator_depth=depth)
                lhs = np.array([[rng.randint(-50, 50) for _ in range(k)]
                                for _ in range(m)])
                rhs = np.array([[rng.randint(-50, 50) for _ in range(n)]
                                for _ in range(k)])
                fast = emulate_gemm(workload, cfg, lhs, rhs)
                slow = reference_simulate(workload, cfg, lhs, rhs)
                assert fast.counters == slow.counters, (workload, cfg)
                assert np.array_equal(fast.output, slow.output)
                assert fast.utilization == slow.utilization

    def test_float_outputs_match_bitwise(self):
        rng = np.random.default_rng(5)
        workload = GemmWorkload(m=4, k=6, n=3)
        cfg = ArrayConfig(3, 2, accumulator_depth=2)
        lhs = rng.standard_normal((4, 6))
        rhs = rng.standard_normal((6, 3))
        fast = emulate_gemm(workload, cfg, lhs, rhs)
        slow = reference_simulate(workload, cfg, lhs, rhs)
        # Both models accumulate in the same order, so even float results
        # agree exactly, not just within tolerance.
        assert np.array_equal(fast.output, slow.output)

    def test_trace_matches_analytic(self):
        workload = GemmWorkload(m=5, k=7, n=4)
        cfg = ArrayConfig(3, 3, accumulator_depth=2)
        fast = emulate_gemm(workload, cfg, trace=True)
        slow = reference_simulate(workload, cfg, trace=True)
        assert fast.per_tile_trace == slow.per_tile_trace

    def test_stall_case_agrees(self):
        # k_tiles=(4, 1), n_tiles=(2, 2): the short (1, 2) tile's window is
        # 1 + (1+2-1) = 3 cycles while the next load needs 4 rows.
        workload = GemmWorkload(m=1, k=5, n=4)
        cfg = ArrayConfig(4, 2)
        fast = emulate_gemm(workload, cfg)
        slow = reference_simulate(workload, cfg)
        assert fast.counters.stall_cycles == 1
        assert fast.counters == slow.counters
