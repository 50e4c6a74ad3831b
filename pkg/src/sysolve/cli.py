"""Command-line front end.

Subcommands: ``emulate``, ``sweep``, ``ratio-sweep``, ``robust``,
``pareto``, ``heatmap``.  Exit codes: 0 on success, 1 for input or
validation problems, 2 for emulation failures.  All defaults reproduce the
standard experiments (16..256 step 8 grid, 6/2/2/1 movement-cost weights,
4096-PE ratio sweep) with zero flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import explore, pareto
from .core import ArrayConfig, emulate_gemm, emulate_network
from .energy import DEFAULT_WEIGHTS, energy_cost, load_weights
from .errors import EmulationError, InputError, SysolveError
from .workloads import load_network, lower_network


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage through the exit-code-1 path."""

    def error(self, message):
        raise InputError(message)


def _add_config_flags(parser) -> None:
    parser.add_argument("--weight-bits", type=int, default=8)
    parser.add_argument("--activation-bits", type=int, default=8)
    parser.add_argument("--accumulator-bits", type=int, default=32)
    parser.add_argument("--accumulator-depth", type=int, default=4096)
    parser.add_argument("--fifo-depth", type=int, default=8)


def _base_config(args, height: int = 1, width: int = 1) -> ArrayConfig:
    return ArrayConfig(
        height=height,
        width=width,
        weight_bits=args.weight_bits,
        activation_bits=args.activation_bits,
        accumulator_bits=args.accumulator_bits,
        accumulator_depth=args.accumulator_depth,
        fifo_depth=args.fifo_depth,
    )


def _energy_weights(args):
    if getattr(args, "weights_file", None):
        return load_weights(args.weights_file)
    return DEFAULT_WEIGHTS


def _parse_grid(text: str) -> explore.GridSweepSpec:
    try:
        h_part, w_part = text.split(",")
        h_min, h_max, h_step = (int(v) for v in h_part.split(":"))
        w_min, w_max, w_step = (int(v) for v in w_part.split(":"))
    except ValueError:
        raise InputError(
            f"bad --grid {text!r}; expected hmin:hmax:hstep,wmin:wmax:wstep"
        )
    return explore.GridSweepSpec(h_min, h_max, h_step, w_min, w_max, w_step)


def _parse_ratios(text: str) -> tuple[tuple[int, int], ...]:
    ratios = []
    for part in text.split(","):
        try:
            num, den = (int(v) for v in part.split(":"))
        except ValueError:
            raise InputError(f"bad ratio {part!r}; expected num:den")
        ratios.append((num, den))
    return tuple(ratios)


def _load_models(paths):
    return [load_network(path) for path in paths]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_emulate(args) -> int:
    net = load_network(args.model)
    config = _base_config(args, args.height, args.width)
    weights = _energy_weights(args)
    workloads = lower_network(net)
    report = emulate_network(workloads, config)
    if args.trace:
        rows = []
        for workload in workloads:
            tile_report = emulate_gemm(workload, config, trace=True)
            rows.extend(tile_report.per_tile_trace)
        explore.write_trace_csv(rows, args.trace)
    counters = report.counters
    payload = {
        "model": net.model_name,
        "height": args.height,
        "width": args.width,
        "m_ub": counters.m_ub,
        "m_inter_pe": counters.m_inter_pe,
        "m_intra_pe": counters.m_intra_pe,
        "m_aa": counters.m_aa,
        "macs": counters.macs,
        "cycles": counters.cycles,
        "stall_cycles": counters.stall_cycles,
        "peak_weight_words_per_cycle": float(counters.peak_weight_words_per_cycle),
        "utilization": float(report.utilization),
        "energy": _json_number(energy_cost(counters, weights)),
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _json_number(value):
    return value.numerator if value.denominator == 1 else float(value)


def _cmd_sweep(args) -> int:
    models = _load_models(args.models)
    spec = _parse_grid(args.grid)
    spec = explore.GridSweepSpec(
        spec.height_min, spec.height_max, spec.height_step,
        spec.width_min, spec.width_max, spec.width_step,
        base_config=_base_config(args),
    )
    records = explore.grid_sweep(models, spec, weights=_energy_weights(args))
    explore.write_sweep_csv(records, args.out)
    return 0


def _cmd_ratio_sweep(args) -> int:
    models = _load_models(args.models)
    spec = explore.RatioSweepSpec(
        pe_count=args.pe_count,
        ratios=_parse_ratios(args.ratios),
        base_config=_base_config(args),
    )
    records = explore.ratio_sweep(models, spec, weights=_energy_weights(args))
    explore.write_sweep_csv(records, args.out)
    return 0


def _cmd_robust(args) -> int:
    records = explore.read_sweep_csv(args.sweep)
    rows = explore.robustness_table(records)
    explore.write_robust_csv(rows, args.out)
    return 0


_ROBUST_OBJECTIVES = ("avg_norm_energy", "avg_norm_cycles")


def _cmd_pareto(args) -> int:
    names = tuple(args.objectives.split(","))
    if len(names) != 2:
        raise InputError(f"--objectives needs two comma-separated names, got {args.objectives!r}")
    if set(names) <= set(_ROBUST_OBJECTIVES):
        rows = explore.read_robust_csv(args.table)
        by_name = {
            "avg_norm_energy": lambda row: row[2],
            "avg_norm_cycles": lambda row: row[3],
        }
        points = [
            ((row[0], row[1]), by_name[names[0]](row), by_name[names[1]](row))
            for row in rows
        ]
    else:
        records = explore.read_sweep_csv(args.table)
        models = {record.model_name for record in records}
        if len(records) and len(models) > 1:
            raise InputError(
                f"sweep contains {sorted(models)}; compute the frontier per model "
                "or use a robustness table"
            )
        points = pareto.orient_objectives(records, names)
    ranked = pareto.pareto_front(points)
    frontier = sorted(
        (point for point in ranked if point.rank == 1),
        key=lambda point: point.point_id,
    )
    pareto.write_frontier_csv(frontier, args.out)
    return 0


def _cmd_heatmap(args) -> int:
    records = explore.read_sweep_csv(args.sweep)
    heights, widths, matrix = explore.heatmap_matrix(records, args.metric, args.model)
    lines = ["," + ",".join(str(w) for w in widths)]
    for height, row in zip(heights, matrix):
        lines.append(
            str(height) + "," + ",".join(explore.format_number(v) for v in row)
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="sysolve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("emulate", help="emulate one model on one configuration")
    p.add_argument("model", help="layer-spec JSON file")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--weights-file", help="movement-cost weight overrides (JSON)")
    p.add_argument("--trace", help="write per-tile trace CSV to this path")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_emulate)

    p = sub.add_parser("sweep", help="rectangular grid sweep to CSV")
    p.add_argument("models", nargs="+", help="layer-spec JSON files")
    p.add_argument("--grid", default="16:256:8,16:256:8",
                   help="hmin:hmax:hstep,wmin:wmax:wstep")
    p.add_argument("--weights-file")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("ratio-sweep", help="equal-PE-count aspect-ratio sweep")
    p.add_argument("models", nargs="+")
    p.add_argument("--pe-count", type=int, default=explore.DEFAULT_PE_COUNT)
    p.add_argument("--ratios", default="64:1,16:1,4:1,1:1,1:4,1:16,1:64")
    p.add_argument("--weights-file")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_ratio_sweep)

    p = sub.add_parser("robust", help="averaged normalized robustness table")
    p.add_argument("sweep", help="sweep CSV covering every model at every point")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_robust)

    p = sub.add_parser("pareto", help="non-dominated frontier of a sweep or table")
    p.add_argument("table", help="sweep CSV or robustness CSV")
    p.add_argument("--objectives", default="cycles,energy",
                   help="two of: cycles, energy, utilization, "
                        "avg_norm_energy, avg_norm_cycles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pareto)

    p = sub.add_parser("heatmap", help="reshape one sweep metric to a matrix CSV")
    p.add_argument("sweep")
    p.add_argument("--metric", default="energy",
                   choices=("energy", "cycles", "utilization"))
    p.add_argument("--model", help="model name when the sweep holds several")
    p.add_argument("--out", help="write the matrix here instead of stdout")
    p.set_defaults(func=_cmd_heatmap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except EmulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, SysolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
