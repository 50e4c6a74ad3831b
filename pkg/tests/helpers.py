"""Shared fixtures-in-spirit for the test suite."""

from fractions import Fraction

from sysolve.explore import GridSweepSpec, SweepRecord
from sysolve.workloads import LayerSpec, NetworkSpec

SMALL_GRID = GridSweepSpec(4, 8, 4, 4, 8, 4)  # 2x2 grid


def tiny_net(name="tiny", c_out=8):
    return NetworkSpec(
        model_name=name, input_h=8, input_w=8,
        layers=(
            LayerSpec(name="c1", kind="conv2d", input_h=8, input_w=8, c_in=3,
                      c_out=c_out, kernel_h=3, kernel_w=3, pad_h=1, pad_w=1),
            LayerSpec(name="fc", kind="fully_connected", input_h=1, input_w=1,
                      c_in=c_out * 64, c_out=10),
        ),
    )


def make_record(model, h, w, cycles=100, energy=1000, utilization="1/2"):
    return SweepRecord(
        model_name=model, height=h, width=w, cycles=cycles,
        utilization=Fraction(utilization), energy=Fraction(energy),
        m_ub=1, m_inter_pe=2, m_intra_pe=3, m_aa=4, stall_cycles=0,
        peak_weight_words_per_cycle=Fraction(8),
    )
