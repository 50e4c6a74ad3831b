"""Movement-cost model and normalization utilities."""

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysolve.core import MovementCounters
from sysolve.energy import (
    DEFAULT_WEIGHTS,
    EnergyWeights,
    energy_cost,
    load_weights,
    normalize_per_model,
)
from sysolve.errors import EmptyInput, InputError, NonPositiveMetric

counter_values = st.integers(0, 10**12)


def counters(ub=0, inter=0, aa=0, intra=0):
    return MovementCounters(m_ub=ub, m_inter_pe=inter, m_aa=aa, m_intra_pe=intra)


class TestEnergyCost:
    def test_unified_buffer_coefficient(self):
        assert energy_cost(counters(ub=1)) == 6

    def test_zero_counters(self):
        assert energy_cost(counters()) == 0

    def test_direct_substitution(self):
        assert energy_cost(counters(ub=2, inter=3, aa=5, intra=7)) == 35

    def test_custom_weights(self):
        weights = EnergyWeights(ub_weight=Fraction(10), inter_pe_weight=Fraction(1),
                                aa_weight=Fraction(1), intra_pe_weight=Fraction(2))
        assert energy_cost(counters(ub=1, inter=1, aa=1, intra=1), weights) == 14

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(InputError):
            EnergyWeights(ub_weight=Fraction(0))

    @given(counter_values, counter_values, counter_values, counter_values)
    def test_default_weight_identity(self, ub, inter, aa, intra):
        c = counters(ub=ub, inter=inter, aa=aa, intra=intra)
        assert energy_cost(c) == 6 * ub + 2 * (inter + aa) + intra

    @given(counter_values, counter_values, counter_values, counter_values,
           st.integers(1, 1000))
    def test_linearity(self, ub, inter, aa, intra, scale):
        c = counters(ub=ub, inter=inter, aa=aa, intra=intra)
        scaled = counters(ub=ub * scale, inter=inter * scale,
                          aa=aa * scale, intra=intra * scale)
        assert energy_cost(scaled) == scale * energy_cost(c)
        assert energy_cost(c + c) == 2 * energy_cost(c)


class TestNormalization:
    def test_min_division(self):
        out = normalize_per_model([("a", 10), ("b", 20), ("c", 40)])
        assert out == [("a", Fraction(1)), ("b", Fraction(2)), ("c", Fraction(4))]

    def test_single_record(self):
        assert normalize_per_model([("only", 17)]) == [("only", Fraction(1))]

    def test_ties_both_one(self):
        out = normalize_per_model([("a", 3), ("b", 3)])
        assert [v for _, v in out] == [Fraction(1), Fraction(1)]

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            normalize_per_model([])

    def test_nonpositive_rejected(self):
        with pytest.raises(NonPositiveMetric):
            normalize_per_model([("a", 0), ("b", 5)])

    @given(st.lists(st.integers(1, 10**9), min_size=1, max_size=20),
           st.integers(1, 10**6))
    def test_scale_invariance(self, values, scale):
        records = list(enumerate(values))
        scaled = [(key, value * scale) for key, value in records]
        assert normalize_per_model(records) == normalize_per_model(scaled)


class TestWeightsFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "weights.json"
        path.write_text(json.dumps({"ub": 6, "inter_pe": 2, "aa": 2, "intra_pe": 1}))
        assert load_weights(path) == DEFAULT_WEIGHTS

    def test_partial_override(self, tmp_path):
        path = tmp_path / "weights.json"
        path.write_text(json.dumps({"ub": 9}))
        weights = load_weights(path)
        assert weights.ub_weight == 9
        assert weights.intra_pe_weight == 1

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "weights.json"
        path.write_text(json.dumps({"dram": 100}))
        with pytest.raises(InputError, match="dram"):
            load_weights(path)
