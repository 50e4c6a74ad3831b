"""Design-space exploration: grid sweeps, equal-PE-count aspect-ratio
sweeps, and cross-model averaged robustness tables.

Sweep evaluation is embarrassingly parallel over design points; records are
always returned in canonical (model, height, width) order so results do not
depend on the degree of parallelism.  The ``SYSOLVE_THREADS`` environment
variable caps worker processes.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .core import ArrayConfig, TileTrace, emulate_network
from .energy import DEFAULT_WEIGHTS, EnergyWeights, energy_cost, normalize_per_model
from .errors import (
    DuplicatePoint,
    InputError,
    MissingDesignPoint,
    NonSquareDecomposition,
    RaggedGrid,
)
from .workloads import GemmWorkload, NetworkSpec, lower_network

#: The default exploration grid: 16..256 in increments of 8 on both axes,
#: 961 design points.
DEFAULT_GRID = (16, 256, 8, 16, 256, 8)

#: Default equal-PE-count sweep: 4096 PEs at power-of-two ratios.
DEFAULT_PE_COUNT = 4096
DEFAULT_RATIOS = ((64, 1), (16, 1), (4, 1), (1, 1), (1, 4), (1, 16), (1, 64))


@dataclass(frozen=True)
class GridSweepSpec:
    """A rectangular height x width sweep."""

    height_min: int = DEFAULT_GRID[0]
    height_max: int = DEFAULT_GRID[1]
    height_step: int = DEFAULT_GRID[2]
    width_min: int = DEFAULT_GRID[3]
    width_max: int = DEFAULT_GRID[4]
    width_step: int = DEFAULT_GRID[5]
    base_config: ArrayConfig = field(default_factory=lambda: ArrayConfig(1, 1))

    def __post_init__(self):
        for axis in ("height", "width"):
            lo = getattr(self, f"{axis}_min")
            hi = getattr(self, f"{axis}_max")
            step = getattr(self, f"{axis}_step")
            if lo < 1 or hi < lo:
                raise InputError(f"{axis} range must satisfy 1 <= min <= max")
            if step < 1:
                raise InputError(f"{axis}_step must be >= 1")
            if (hi - lo) % step:
                raise InputError(f"({axis}_max - {axis}_min) must be divisible by the step")

    @property
    def points(self) -> list[tuple[int, int]]:
        heights = range(self.height_min, self.height_max + 1, self.height_step)
        widths = range(self.width_min, self.width_max + 1, self.width_step)
        return [(h, w) for h in heights for w in widths]


def _is_pow2(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


def ratio_dimensions(pe_count: int, ratio: tuple[int, int]) -> tuple[int, int]:
    """Height and width for one height:width ratio at a fixed PE count."""
    num, den = ratio
    if num < 1 or den < 1:
        raise InputError(f"ratio {num}:{den} must be positive")
    bad = NonSquareDecomposition(
        f"ratio {num}:{den} does not decompose {pe_count} PEs into integer dimensions"
    )
    square = pe_count * num
    if square % den:
        raise bad
    square //= den
    height = math.isqrt(square)
    if height * height != square or pe_count % height:
        raise bad
    width = pe_count // height
    return height, width


@dataclass(frozen=True)
class RatioSweepSpec:
    """Equal-PE-count sweep over height:width aspect ratios."""

    pe_count: int = DEFAULT_PE_COUNT
    ratios: tuple[tuple[int, int], ...] = DEFAULT_RATIOS
    base_config: ArrayConfig = field(default_factory=lambda: ArrayConfig(1, 1))

    def __post_init__(self):
        if not _is_pow2(self.pe_count):
            raise InputError(f"pe_count {self.pe_count} is not a power of two")
        if not self.ratios:
            raise InputError("at least one ratio is required")
        for num, den in self.ratios:
            if not (_is_pow2(num) and _is_pow2(den)):
                raise InputError(f"ratio {num}:{den} is not a power-of-two ratio")
        # Raises NonSquareDecomposition early if any ratio does not work out.
        self.dimensions  # noqa: B018

    @property
    def dimensions(self) -> list[tuple[int, int]]:
        return [ratio_dimensions(self.pe_count, ratio) for ratio in self.ratios]


@dataclass(frozen=True)
class SweepRecord:
    """One (model, design point) emulation result."""

    model_name: str
    height: int
    width: int
    cycles: int
    utilization: Fraction
    energy: Fraction
    m_ub: int
    m_inter_pe: int
    m_intra_pe: int
    m_aa: int
    stall_cycles: int
    peak_weight_words_per_cycle: Fraction

    @property
    def point(self) -> tuple[int, int]:
        return (self.height, self.width)


def _evaluate_point(task) -> SweepRecord:
    model_name, workloads, base_config, height, width, weights = task
    config = base_config.with_dimensions(height, width)
    report = emulate_network(list(workloads), config)
    c = report.counters
    return SweepRecord(
        model_name=model_name,
        height=height,
        width=width,
        cycles=c.cycles,
        utilization=report.utilization,
        energy=energy_cost(c, weights),
        m_ub=c.m_ub,
        m_inter_pe=c.m_inter_pe,
        m_intra_pe=c.m_intra_pe,
        m_aa=c.m_aa,
        stall_cycles=c.stall_cycles,
        peak_weight_words_per_cycle=c.peak_weight_words_per_cycle,
    )


def _worker_count(workers: int | None, n_tasks: int) -> int:
    if workers is None:
        workers = os.cpu_count() or 1
        cap = os.environ.get("SYSOLVE_THREADS")
        if cap is not None:
            try:
                workers = min(workers, max(1, int(cap)))
            except ValueError:
                raise InputError(f"SYSOLVE_THREADS must be an integer, got {cap!r}")
    return max(1, min(workers, n_tasks))


def _run_tasks(tasks, workers: int | None) -> list[SweepRecord]:
    workers = _worker_count(workers, len(tasks))
    if workers == 1:
        return [_evaluate_point(task) for task in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_point, tasks, chunksize=chunk))


def _lowered(models: Sequence[NetworkSpec]) -> list[tuple[str, tuple[GemmWorkload, ...]]]:
    if not models:
        raise InputError("at least one model is required")
    named = [(net.model_name, tuple(lower_network(net))) for net in models]
    names = [name for name, _ in named]
    if len(set(names)) != len(names):
        raise InputError("model names must be unique within one sweep")
    return sorted(named)


def grid_sweep(
    models: Sequence[NetworkSpec],
    spec: GridSweepSpec,
    weights: EnergyWeights = DEFAULT_WEIGHTS,
    workers: int | None = None,
) -> list[SweepRecord]:
    """One record per (model, height, width), canonically ordered."""
    tasks = [
        (name, workloads, spec.base_config, h, w, weights)
        for name, workloads in _lowered(models)
        for h, w in spec.points
    ]
    return _run_tasks(tasks, workers)


def ratio_sweep(
    models: Sequence[NetworkSpec],
    spec: RatioSweepSpec,
    weights: EnergyWeights = DEFAULT_WEIGHTS,
    workers: int | None = None,
) -> list[SweepRecord]:
    """One record per (model, ratio); all records share height*width."""
    tasks = [
        (name, workloads, spec.base_config, h, w, weights)
        for name, workloads in _lowered(models)
        for h, w in spec.dimensions
    ]
    return _run_tasks(tasks, workers)


_ROBUST_METRICS = ("energy", "cycles")


def robustness_table(
    records: Sequence[SweepRecord],
    metrics: tuple[str, str] = _ROBUST_METRICS,
) -> list[tuple[int, int, Fraction, Fraction]]:
    """Per design point, the across-model mean of min-normalized metrics.

    Every model must contribute exactly one record per design point.
    """
    for metric in metrics:
        if metric not in _ROBUST_METRICS:
            raise InputError(f"unsupported robustness metric {metric!r}")
    if not records:
        raise MissingDesignPoint("no records to aggregate")
    by_model: dict[str, dict[tuple[int, int], SweepRecord]] = {}
    for record in records:
        rows = by_model.setdefault(record.model_name, {})
        if record.point in rows:
            raise DuplicatePoint(
                f"model {record.model_name!r} has duplicate design point {record.point}"
            )
        rows[record.point] = record
    points = None
    for model_name, rows in by_model.items():
        if points is None:
            points = set(rows)
        elif set(rows) != points:
            raise MissingDesignPoint(
                f"model {model_name!r} does not cover the same design points"
            )
    sums = {point: [Fraction(0)] * len(metrics) for point in points}
    for rows in by_model.values():
        for slot, metric in enumerate(metrics):
            pairs = [(point, getattr(rows[point], metric)) for point in sorted(points)]
            for point, normalized in normalize_per_model(pairs):
                sums[point][slot] += normalized
    n_models = len(by_model)
    return [
        (h, w, *(total / n_models for total in sums[(h, w)]))
        for h, w in sorted(points)
    ]


SWEEP_COLUMNS = (
    "model", "height", "width", "cycles", "utilization", "energy",
    "m_ub", "m_inter_pe", "m_intra_pe", "m_aa", "stall_cycles",
    "peak_weight_words_per_cycle",
)

ROBUST_COLUMNS = ("height", "width", "avg_norm_energy", "avg_norm_cycles")

TRACE_COLUMNS = (
    "tile_id", "h_t", "w_t", "m_chunk", "compute_cycles",
    "exposed_load_cycles", "stalls",
)


def format_number(value) -> str:
    """Exact integers stay integers; other rationals become round-trip floats."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return Fraction(float(text))


def _record_row(record: SweepRecord) -> list[str]:
    return [
        record.model_name,
        str(record.height),
        str(record.width),
        str(record.cycles),
        format_number(record.utilization),
        format_number(record.energy),
        str(record.m_ub),
        str(record.m_inter_pe),
        str(record.m_intra_pe),
        str(record.m_aa),
        str(record.stall_cycles),
        format_number(record.peak_weight_words_per_cycle),
    ]


def write_sweep_csv(records: Iterable[SweepRecord], path: str | Path) -> None:
    """Stream records to CSV; a trailing comment footer marks completeness."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for record in records:
            writer.writerow(_record_row(record))
            count += 1
        handle.write(f"# complete records={count}\n")


def read_sweep_csv(path: str | Path) -> list[SweepRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            lines = [line for line in handle if not line.startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read sweep file {path}: {exc}") from exc
    reader = csv.reader(lines)
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise InputError(f"sweep file {path} is empty")
    if header != SWEEP_COLUMNS:
        raise InputError(f"sweep file {path} has unexpected header {header}")
    records = []
    for row in reader:
        if len(row) != len(SWEEP_COLUMNS):
            raise InputError(f"sweep file {path}: malformed row {row}")
        records.append(SweepRecord(
            model_name=row[0],
            height=int(row[1]),
            width=int(row[2]),
            cycles=int(row[3]),
            utilization=Fraction(parse_number(row[4])),
            energy=Fraction(parse_number(row[5])),
            m_ub=int(row[6]),
            m_inter_pe=int(row[7]),
            m_intra_pe=int(row[8]),
            m_aa=int(row[9]),
            stall_cycles=int(row[10]),
            peak_weight_words_per_cycle=Fraction(parse_number(row[11])),
        ))
    return records


def write_robust_csv(rows, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(ROBUST_COLUMNS)
        for height, width, energy, cycles in rows:
            writer.writerow([
                str(height), str(width),
                format_number(energy), format_number(cycles),
            ])


def read_robust_csv(path: str | Path):
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            lines = [line for line in handle if not line.startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read robustness file {path}: {exc}") from exc
    reader = csv.reader(lines)
    header = tuple(next(reader, ()))
    if header != ROBUST_COLUMNS:
        raise InputError(f"robustness file {path} has unexpected header {header}")
    return [
        (int(row[0]), int(row[1]), Fraction(parse_number(row[2])),
         Fraction(parse_number(row[3])))
        for row in reader
    ]


def write_trace_csv(trace: Sequence[TileTrace], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            writer.writerow([
                row.tile_id, row.h_t, row.w_t, row.m_chunk,
                row.compute_cycles, row.exposed_load_cycles, row.stalls,
            ])


def heatmap_matrix(
    records: Sequence[SweepRecord], metric: str, model: str | None = None
):
    """Pivot sweep records into (heights, widths, value rows) for one model."""
    if metric not in ("cycles", "utilization", "energy"):
        raise InputError(f"unsupported heatmap metric {metric!r}")
    models = sorted({record.model_name for record in records})
    if model is None:
        if len(models) != 1:
            raise InputError(
                f"sweep contains {len(models)} models {models}; pass an explicit model"
            )
        model = models[0]
    rows = [record for record in records if record.model_name == model]
    if not rows:
        raise InputError(f"model {model!r} not present in the sweep")
    heights = sorted({record.height for record in rows})
    widths = sorted({record.width for record in rows})
    table = {}
    for record in rows:
        if record.point in table:
            raise RaggedGrid(f"duplicate design point {record.point}")
        table[record.point] = getattr(record, metric)
    if len(table) != len(heights) * len(widths):
        raise RaggedGrid(
            f"model {model!r} does not cover the full {len(heights)}x{len(widths)} grid"
        )
    matrix = [[table[(h, w)] for w in widths] for h in heights]
    return heights, widths, matrix
