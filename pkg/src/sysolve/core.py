"""Analytical weight-stationary systolic array emulator.

The array is a ``height`` x ``width`` grid of processing elements.  Weights
stay pinned in PE registers while activations stream in from the left
(skewed, one FIFO per row) and partial sums move down columns into an
accumulator array below the bottom row.  Each PE holds four registers: a
double-buffered weight pair, an activation register, and an output register.

Counting rules (normative for every number this package reports; the
event-driven simulator in :mod:`sysolve.reference` implements the same rules
literally, register transfer by register transfer):

For a weight tile of size ``h x w`` streaming a chunk of ``mc`` activation
rows:

* compute cycles per (tile, chunk): ``mc + h + w - 1`` (skewed wavefront
  fill plus drain, including the final transfer into the accumulator);
* the next tile's weights load during the current tile's compute window,
  one full-width row per cycle (``h_next`` cycles); any shortfall becomes
  stall cycles; the first tile's load is fully exposed;
* total cycles = sum of compute + exposed first load + stalls, times
  ``repeat``;
* unified-buffer accesses: one read per activation element entering the
  boundary column (re-streamed once per column tile), one read per weight
  word, plus ``m*n`` accumulator readbacks and ``m*n`` output writes at the
  end of the workload;
* inter-PE register reads: one per activation hop between columns plus one
  per partial-sum hop between rows;
* intra-PE accesses: three per MAC (activation-register write,
  weight-register read, output-register write) plus ``2*h*w`` per tile
  (shadow weight-register writes and the active-register swap);
* array-to-accumulator transfers: each bottom-row exit, i.e. ``mc*w`` per
  (tile, chunk);
* peak weight words per cycle: the largest tile load divided by its
  overlap window.

Tiles are visited column-group-major: all reduction (k) tiles of one
feature (n) tile before moving to the next, so partial outputs accumulate
across k tiles before any writeback.  Groups (``repeat``) rerun the whole
schedule, including the exposed first load.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BitwidthOverflow, EmulationError, InputError, ShapeMismatch
from .workloads import GemmWorkload

_ALLOWED_BITS = (8, 16, 32)


@dataclass(frozen=True)
class ArrayConfig:
    """One hardware design point."""

    height: int
    width: int
    weight_bits: int = 8
    activation_bits: int = 8
    accumulator_bits: int = 32
    accumulator_depth: int = 4096
    fifo_depth: int = 8

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise InputError("array dimensions must be >= 1")
        if self.accumulator_depth < 1:
            raise InputError("accumulator_depth must be >= 1")
        if self.fifo_depth < 1:
            raise InputError("fifo_depth must be >= 1")
        for name in ("weight_bits", "activation_bits", "accumulator_bits"):
            if getattr(self, name) not in _ALLOWED_BITS:
                raise InputError(f"{name} must be one of {_ALLOWED_BITS}")

    @property
    def pe_count(self) -> int:
        return self.height * self.width

    def with_dimensions(self, height: int, width: int) -> "ArrayConfig":
        return ArrayConfig(
            height=height,
            width=width,
            weight_bits=self.weight_bits,
            activation_bits=self.activation_bits,
            accumulator_bits=self.accumulator_bits,
            accumulator_depth=self.accumulator_depth,
            fifo_depth=self.fifo_depth,
        )


@dataclass(frozen=True)
class TilePlan:
    """Greedy full-size-first partitioning of one GEMM onto the array."""

    k_tiles: tuple[int, ...]
    n_tiles: tuple[int, ...]
    m_chunks: tuple[int, ...]


def _split(total: int, limit: int) -> tuple[int, ...]:
    full, rest = divmod(total, limit)
    return (limit,) * full + ((rest,) if rest else ())


def plan_tiles(workload: GemmWorkload, config: ArrayConfig) -> TilePlan:
    """Partition k over the array height, n over the width, m over the
    accumulator depth; only the last entry of each list may be partial."""
    return TilePlan(
        k_tiles=_split(workload.k, config.height),
        n_tiles=_split(workload.n, config.width),
        m_chunks=_split(workload.m, config.accumulator_depth),
    )


@dataclass(frozen=True)
class MovementCounters:
    """Classified data-movement totals plus MAC and cycle counts."""

    m_ub: int = 0
    m_inter_pe: int = 0
    m_intra_pe: int = 0
    m_aa: int = 0
    macs: int = 0
    cycles: int = 0
    stall_cycles: int = 0
    peak_weight_words_per_cycle: Fraction = Fraction(0)

    def __add__(self, other: "MovementCounters") -> "MovementCounters":
        return MovementCounters(
            m_ub=self.m_ub + other.m_ub,
            m_inter_pe=self.m_inter_pe + other.m_inter_pe,
            m_intra_pe=self.m_intra_pe + other.m_intra_pe,
            m_aa=self.m_aa + other.m_aa,
            macs=self.macs + other.macs,
            cycles=self.cycles + other.cycles,
            stall_cycles=self.stall_cycles + other.stall_cycles,
            peak_weight_words_per_cycle=max(
                self.peak_weight_words_per_cycle,
                other.peak_weight_words_per_cycle,
            ),
        )

    def as_dict(self) -> dict:
        return {
            "m_ub": self.m_ub,
            "m_inter_pe": self.m_inter_pe,
            "m_intra_pe": self.m_intra_pe,
            "m_aa": self.m_aa,
            "macs": self.macs,
            "cycles": self.cycles,
            "stall_cycles": self.stall_cycles,
            "peak_weight_words_per_cycle": self.peak_weight_words_per_cycle,
        }


@dataclass(frozen=True)
class TileTrace:
    """One (tile, chunk) schedule step for CSV trace output."""

    tile_id: int
    h_t: int
    w_t: int
    m_chunk: int
    compute_cycles: int
    exposed_load_cycles: int
    stalls: int


@dataclass(frozen=True)
class EmulationReport:
    counters: MovementCounters
    utilization: Fraction
    output: np.ndarray | None = None
    per_tile_trace: tuple[TileTrace, ...] | None = None


def _utilization(counters: MovementCounters, config: ArrayConfig) -> Fraction:
    if counters.cycles == 0:
        return Fraction(0)
    return Fraction(counters.macs, config.pe_count * counters.cycles)


def _tile_compute(m: int, n_chunks: int, h: int, w: int) -> int:
    # All chunks of one tile: sum over chunks of (mc + h + w - 1).
    return m + n_chunks * (h + w - 1)


def _transition_classes(ks, ns):
    """Distinct (cur_h, cur_w, next_h, next_w, count) tile transitions.

    The tile sequence is column-group-major and only the last k/n tile may
    be partial, so the full sequence collapses to at most six classes.
    """
    n_k, n_n = len(ks), len(ns)
    k_full, k_first, k_last = ks[0], ks[0], ks[-1]
    n_full, n_last = ns[0], ns[-1]
    w_classes = [(n_full, n_n - 1), (n_last, 1)] if n_n > 1 else [(n_last, 1)]
    classes = []
    if n_k >= 2:
        for w, count in w_classes:
            if n_k > 2:
                classes.append((k_full, w, k_full, w, (n_k - 2) * count))
            classes.append((k_full, w, k_last, w, count))
    if n_n >= 2:
        if n_n > 2:
            classes.append((k_last, n_full, k_first, n_full, n_n - 2))
        classes.append((k_last, n_full, k_first, n_last, 1))
    return classes


def _count_movements(workload: GemmWorkload, plan: TilePlan) -> MovementCounters:
    """Closed-form totals of the normative counting rules."""
    m, k, n, repeat = workload.m, workload.k, workload.n, workload.repeat
    ks, ns = plan.k_tiles, plan.n_tiles
    n_k, n_n, n_m = len(ks), len(ns), len(plan.m_chunks)

    macs = m * k * n
    m_ub = m * k * n_n + k * n + 2 * m * n
    m_inter_pe = m * (k * (n - n_n) + n * (k - n_k))
    m_aa = m * n * n_k
    m_intra_pe = 3 * macs + 2 * k * n

    compute = n_k * n_n * m + n_m * (n_n * k + n_k * n - n_k * n_n)
    exposed = ks[0]
    stalls = 0
    peak = Fraction(ks[0] * ns[0], max(1, ks[0]))
    for cur_h, cur_w, nxt_h, nxt_w, count in _transition_classes(ks, ns):
        window = _tile_compute(m, n_m, cur_h, cur_w)
        stalls += count * max(0, nxt_h - window)
        peak = max(peak, Fraction(nxt_h * nxt_w, max(1, window)))

    return MovementCounters(
        m_ub=m_ub * repeat,
        m_inter_pe=m_inter_pe * repeat,
        m_intra_pe=m_intra_pe * repeat,
        m_aa=m_aa * repeat,
        macs=macs * repeat,
        cycles=(compute + exposed + stalls) * repeat,
        stall_cycles=stalls * repeat,
        peak_weight_words_per_cycle=peak,
    )


def _trace_schedule(workload: GemmWorkload, plan: TilePlan) -> tuple[TileTrace, ...]:
    """Per-(tile, chunk) schedule of one repeat instance."""
    m = workload.m
    n_m = len(plan.m_chunks)
    tiles = [(h, w) for w in plan.n_tiles for h in plan.k_tiles]
    rows = []
    for tile_id, (h, w) in enumerate(tiles):
        if tile_id == 0:
            exposed, stall = h, 0
        else:
            prev_h, prev_w = tiles[tile_id - 1]
            exposed = 0
            stall = max(0, h - _tile_compute(m, n_m, prev_h, prev_w))
        for chunk_id, mc in enumerate(plan.m_chunks):
            rows.append(TileTrace(
                tile_id=tile_id,
                h_t=h,
                w_t=w,
                m_chunk=mc,
                compute_cycles=mc + h + w - 1,
                exposed_load_cycles=exposed if chunk_id == 0 else 0,
                stalls=stall if chunk_id == 0 else 0,
            ))
    return tuple(rows)


def _signed_range(bits: int) -> tuple[int, int]:
    return -(1 << (bits - 1)), (1 << (bits - 1)) - 1


def _normalize_operands(workload, lhs, rhs):
    """Validate shapes, pick a dtype, return (lhs, rhs) as (repeat, ., .) arrays."""
    m, k, n, repeat = workload.m, workload.k, workload.n, workload.repeat
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    per_group = lhs.ndim == 3 or rhs.ndim == 3
    want_lhs = (repeat, m, k) if lhs.ndim == 3 else (m, k)
    want_rhs = (repeat, k, n) if rhs.ndim == 3 else (k, n)
    if lhs.shape != want_lhs:
        raise ShapeMismatch(f"lhs shape {lhs.shape} does not match {want_lhs}")
    if rhs.shape != want_rhs:
        raise ShapeMismatch(f"rhs shape {rhs.shape} does not match {want_rhs}")
    integer = (
        np.issubdtype(lhs.dtype, np.integer) and np.issubdtype(rhs.dtype, np.integer)
    )
    dtype = np.int64 if integer else np.float64
    lhs = lhs.astype(dtype, copy=False)
    rhs = rhs.astype(dtype, copy=False)
    if lhs.ndim == 2:
        lhs = np.broadcast_to(lhs, (repeat, m, k))
    if rhs.ndim == 2:
        rhs = np.broadcast_to(rhs, (repeat, k, n))
    return lhs, rhs, integer, per_group


def _check_range(array, bits: int, what: str) -> None:
    lo, hi = _signed_range(bits)
    if array.min(initial=0) < lo or array.max(initial=0) > hi:
        raise BitwidthOverflow(f"{what} value outside signed {bits}-bit range")


def _execute(workload: GemmWorkload, config: ArrayConfig, plan: TilePlan, lhs, rhs):
    """Exact tiled product following the hardware accumulation order.

    Within a k tile, partial sums grow row by row down the array column;
    tile partials are then added into the accumulator.  Every intermediate
    value is checked against the accumulator bit width in integer mode.
    """
    lhs, rhs, integer, per_group = _normalize_operands(workload, lhs, rhs)
    if integer:
        _check_range(lhs, config.activation_bits, "activation")
        _check_range(rhs, config.weight_bits, "weight")
        lo, hi = _signed_range(config.accumulator_bits)
    else:
        if not (np.isfinite(lhs).all() and np.isfinite(rhs).all()):
            raise BitwidthOverflow("operands must be finite")
    m, n = workload.m, workload.n
    out = np.zeros((workload.repeat, m, n), dtype=lhs.dtype)
    for g in range(workload.repeat):
        acc = out[g]
        k_off = 0
        for h in plan.k_tiles:
            partial = np.zeros((m, n), dtype=lhs.dtype)
            for kk in range(k_off, k_off + h):
                partial += np.outer(lhs[g, :, kk], rhs[g, kk, :])
                if integer and (partial.min() < lo or partial.max() > hi):
                    raise BitwidthOverflow(
                        f"partial sum outside signed {config.accumulator_bits}-bit range"
                    )
            acc += partial
            if integer and (acc.min() < lo or acc.max() > hi):
                raise BitwidthOverflow(
                    f"accumulated output outside signed {config.accumulator_bits}-bit range"
                )
            k_off += h
    return out if per_group else out[0]


def emulate_gemm(
    workload: GemmWorkload,
    config: ArrayConfig,
    lhs=None,
    rhs=None,
    trace: bool = False,
) -> EmulationReport:
    """Emulate one GEMM workload on one array configuration.

    Counters come from the closed-form counting rules.  If both operand
    matrices are supplied the numeric product is computed through the same
    tile schedule (``lhs`` may be ``(m, k)`` or ``(repeat, m, k)``, ``rhs``
    ``(k, n)`` or ``(repeat, k, n)``).
    """
    if (lhs is None) != (rhs is None):
        raise ShapeMismatch("supply both operand matrices or neither")
    plan = plan_tiles(workload, config)
    counters = _count_movements(workload, plan)
    output = None
    if lhs is not None:
        output = _execute(workload, config, plan, lhs, rhs)
    return EmulationReport(
        counters=counters,
        utilization=_utilization(counters, config),
        output=output,
        per_tile_trace=_trace_schedule(workload, plan) if trace else None,
    )


def emulate_network(
    workloads: list[GemmWorkload], config: ArrayConfig
) -> EmulationReport:
    """Aggregate emulation of a workload sequence (no functional output)."""
    if not workloads:
        raise InputError("emulate_network requires at least one workload")
    total = MovementCounters()
    for workload in workloads:
        try:
            total = total + _count_movements(workload, plan_tiles(workload, config))
        except EmulationError as exc:
            raise type(exc)(f"workload {workload.source_layer!r}: {exc}") from exc
    return EmulationReport(counters=total, utilization=_utilization(total, config))
