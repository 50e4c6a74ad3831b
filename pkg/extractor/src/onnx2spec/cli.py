"""Command line: onnx2spec model.onnx --input-size HxW --out spec.json."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .extract import ExtractionError, extract_file


def _parse_size(text: str) -> tuple[int, int]:
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ExtractionError(f"bad --input-size {text!r}; expected HxW, e.g. 224x224")
    if h < 1 or w < 1:
        raise ExtractionError("input size must be positive")
    return h, w


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="onnx2spec",
        description="Convert an ONNX CNN graph into layer-spec JSON.",
    )
    parser.add_argument("model", help="path to the .onnx file")
    parser.add_argument("--input-size", default="224x224",
                        help="input spatial size as HxW (default 224x224)")
    parser.add_argument("--out", required=True, help="output spec JSON path")
    parser.add_argument("--report", help="optional extraction report JSON path")
    parser.add_argument("--model-name", help="override the model name field")
    args = parser.parse_args(argv)

    try:
        input_h, input_w = _parse_size(args.input_size)
        spec, report = extract_file(args.model, input_h, input_w, args.model_name)
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    Path(args.out).write_text(json.dumps(spec, indent=1) + "\n", encoding="utf-8")
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.as_dict(), indent=1) + "\n", encoding="utf-8"
        )
    skipped = len(report.skipped_nodes)
    print(f"{args.model}: emitted {report.layers_emitted} layers, "
          f"skipped {skipped} nodes", file=sys.stderr)
    if report.layers_emitted == 0:
        print("error: no GEMM-bearing layers found", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
