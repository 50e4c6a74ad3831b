"""Event-driven per-cycle reference simulator (test oracle).

Unlike :mod:`sysolve.core`, which evaluates the counting rules in closed
form, this module steps a register-transfer model of the array one clock
cycle at a time: activations hop right through activation registers,
partial sums hop down through output registers, bottom-row results land in
the accumulator one cycle after they are produced, and the weight loader
feeds one full-width row per cycle into the shadow registers.  Every
register read/write event increments the matching movement counter, and
the clock value at the end is the cycle count.  Intended for small sizes
only; the exhaustive cross-check against the analytical model is the
correctness anchor for both.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import (
    ArrayConfig,
    EmulationReport,
    MovementCounters,
    TileTrace,
    _check_range,
    _normalize_operands,
    _signed_range,
    _utilization,
    plan_tiles,
)
from .errors import BitwidthOverflow, ShapeMismatch
from .workloads import GemmWorkload


class _Counts:
    __slots__ = ("ub", "inter", "intra", "aa", "macs", "clock", "stalls")

    def __init__(self):
        self.ub = self.inter = self.intra = self.aa = 0
        self.macs = self.clock = self.stalls = 0


def _offsets(sizes):
    out, start = [], 0
    for size in sizes:
        out.append((start, size))
        start += size
    return out


def reference_simulate(
    workload: GemmWorkload,
    config: ArrayConfig,
    lhs=None,
    rhs=None,
    trace: bool = False,
) -> EmulationReport:
    """Simulate one GEMM cycle by cycle; contract matches ``emulate_gemm``."""
    if (lhs is None) != (rhs is None):
        raise ShapeMismatch("supply both operand matrices or neither")
    m, k, n, repeat = workload.m, workload.k, workload.n, workload.repeat
    want_output = lhs is not None
    if lhs is None:
        lhs = np.zeros((m, k), dtype=np.int64)
        rhs = np.zeros((k, n), dtype=np.int64)
    lhs, rhs, integer, per_group = _normalize_operands(workload, lhs, rhs)
    if integer:
        _check_range(lhs, config.activation_bits, "activation")
        _check_range(rhs, config.weight_bits, "weight")
        lo, hi = _signed_range(config.accumulator_bits)
    else:
        if not (np.isfinite(lhs).all() and np.isfinite(rhs).all()):
            raise BitwidthOverflow("operands must be finite")
        lo = hi = None
    lhs_rows = lhs.tolist()
    rhs_rows = rhs.tolist()

    plan = plan_tiles(workload, config)
    tiles = [
        (k_off, h, n_off, w)
        for n_off, w in _offsets(plan.n_tiles)
        for k_off, h in _offsets(plan.k_tiles)
    ]
    chunks = _offsets(plan.m_chunks)

    counts = _Counts()
    peak = Fraction(0)
    outputs = []
    trace_rows: list[TileTrace] = []

    for group in range(repeat):
        a_mat = lhs_rows[group]
        w_mat = rhs_rows[group]
        acc = [[0] * n for _ in range(m)] if integer else [[0.0] * n for _ in range(m)]

        # Exposed load of the first tile: one weight row per cycle.
        _, h0, _, w0 = tiles[0]
        for _ in range(h0):
            counts.clock += 1
            counts.ub += w0      # weight words read from the unified buffer
            counts.intra += w0   # shadow weight-register writes
        counts.intra += h0 * w0  # swap shadow -> active
        peak = max(peak, Fraction(h0 * w0, max(1, h0)))

        stall_in = 0  # stall charged when the current tile's load ran long
        for index, (k_off, h, n_off, w) in enumerate(tiles):
            nxt = tiles[index + 1] if index + 1 < len(tiles) else None
            rows_left = nxt[1] if nxt else 0

            def load_step():
                nonlocal rows_left
                if rows_left:
                    counts.ub += nxt[3]
                    counts.intra += nxt[3]
                    rows_left -= 1

            window = 0
            for chunk_id, (m_off, mc) in enumerate(chunks):
                span = _run_chunk(
                    counts, a_mat, w_mat, acc, load_step,
                    k_off, h, n_off, w, m_off, mc, integer, lo, hi,
                )
                window += span
                if trace and group == 0:
                    trace_rows.append(TileTrace(
                        tile_id=index, h_t=h, w_t=w, m_chunk=mc,
                        compute_cycles=span,
                        exposed_load_cycles=h0 if index == 0 and chunk_id == 0 else 0,
                        stalls=stall_in if chunk_id == 0 else 0,
                    ))
            stall_in = 0
            if nxt:
                peak = max(peak, Fraction(nxt[1] * nxt[3], max(1, window)))
                while rows_left:
                    counts.clock += 1
                    counts.stalls += 1
                    stall_in += 1
                    load_step()
                counts.intra += nxt[1] * nxt[3]  # swap for the incoming tile

        # Final drain: accumulator readback plus output writes, m*n each.
        counts.ub += 2 * m * n
        outputs.append(acc)

    counters = MovementCounters(
        m_ub=counts.ub,
        m_inter_pe=counts.inter,
        m_intra_pe=counts.intra,
        m_aa=counts.aa,
        macs=counts.macs,
        cycles=counts.clock,
        stall_cycles=counts.stalls,
        peak_weight_words_per_cycle=peak,
    )
    output = None
    if want_output:
        dtype = np.int64 if integer else np.float64
        output = np.array(outputs if per_group else outputs[0], dtype=dtype)
    return EmulationReport(
        counters=counters,
        utilization=_utilization(counters, config),
        output=output,
        per_tile_trace=tuple(trace_rows) if trace else None,
    )


def _run_chunk(counts, a_mat, w_mat, acc, load_step,
               k_off, h, n_off, w, m_off, mc, integer, lo, hi) -> int:
    """Stream one chunk of activation rows through the resident tile.

    Returns the number of cycles from the first injection to the last
    accumulator write, inclusive.
    """
    act = [[None] * w for _ in range(h)]
    out = [[None] * w for _ in range(h)]
    pending = []  # bottom-row outputs produced last cycle
    absorbed = 0
    tau = 0
    target = mc * w
    while absorbed < target:
        # Accumulator pulls the previous cycle's bottom-row outputs.
        for r, j, value in pending:
            counts.aa += 1
            total = acc[m_off + r][n_off + j] + value
            if integer and not lo <= total <= hi:
                raise BitwidthOverflow(
                    "accumulated output outside the accumulator bit width"
                )
            acc[m_off + r][n_off + j] = total
            absorbed += 1
        pending = []

        new_act = [[None] * w for _ in range(h)]
        new_out = [[None] * w for _ in range(h)]
        for i in range(h):
            j_lo = max(0, tau - i - (mc - 1))
            j_hi = min(w - 1, tau - i)
            for j in range(j_lo, j_hi + 1):
                r = tau - i - j
                if j == 0:
                    counts.ub += 1  # activation enters from the row FIFO
                    a_val = a_mat[m_off + r][k_off + i]
                else:
                    counts.inter += 1  # read left neighbour's activation register
                    a_val = act[i][j - 1][1]
                if i == 0:
                    psum = 0
                else:
                    counts.inter += 1  # read upper neighbour's output register
                    psum = out[i - 1][j][1]
                value = psum + w_mat[k_off + i][n_off + j] * a_val
                counts.intra += 3
                counts.macs += 1
                if integer and not lo <= value <= hi:
                    raise BitwidthOverflow(
                        "partial sum outside the accumulator bit width"
                    )
                new_act[i][j] = (r, a_val)
                new_out[i][j] = (r, value)
                if i == h - 1:
                    pending.append((r, j, value))
        act, out = new_act, new_out
        tau += 1
        counts.clock += 1
        load_step()
    return tau
