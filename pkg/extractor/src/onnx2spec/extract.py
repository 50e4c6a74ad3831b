"""Map ONNX graphs onto the layer-spec JSON interchange format.

Every Conv node becomes a ``conv2d`` layer and every Gemm/MatMul a
``fully_connected`` layer; all other nodes contribute no GEMM workload and
are listed in the extraction report with a reason.  The emitted JSON
matches the downstream explorer's layer-spec schema field for field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .proto import Graph, Node, parse_model
from .shapes import ShapeState


class ExtractionError(ValueError):
    """The model cannot be extracted at all (unreadable, fully dynamic)."""


class DynamicShape(ExtractionError):
    """The graph input shape cannot be pinned to static dimensions."""


#: Ops that transform activations but never become a GEMM workload.
NO_WORKLOAD = "no GEMM workload"
UNSUPPORTED = "unsupported op"

_LAYER_FIELD_ORDER = (
    "name", "kind", "input_h", "input_w", "c_in", "c_out",
    "kernel_h", "kernel_w", "stride_h", "stride_w",
    "dilation_h", "dilation_w", "pad_h", "pad_w", "groups",
)


@dataclass
class ExtractionReport:
    layers_emitted: int = 0
    skipped_nodes: list[tuple[str, str, str]] = field(default_factory=list)

    def skip(self, node: Node, reason: str) -> None:
        name = node.name or (node.outputs[0] if node.outputs else "?")
        self.skipped_nodes.append((name, node.op_type, reason))

    def as_dict(self) -> dict:
        return {
            "layers_emitted": self.layers_emitted,
            "skipped_nodes": [
                {"name": name, "op_type": op, "reason": reason}
                for name, op, reason in self.skipped_nodes
            ],
        }


def _layer_name(node: Node, index: int) -> str:
    if node.name:
        return node.name
    if node.outputs:
        return node.outputs[0]
    return f"{node.op_type.lower()}_{index}"


def _conv_layer(state: ShapeState, node: Node, name: str):
    """LayerSpec dict for one Conv node, or a skip reason string."""
    x = state.shape(node.inputs[0])
    w = state.shape(node.inputs[1])
    if x is None:
        return "unresolved input shape"
    if w is None:
        return "unresolved weight shape"
    if len(x) != 4 or len(w) != 4:
        return f"{len(x) - 2}D convolution"
    geometry = state.conv_geometry(node)
    if geometry is None:
        return "unresolved convolution geometry"
    kernel, strides, dilations, pads, group = geometry
    for begin, end in pads:
        if begin != end:
            return "asymmetric padding"
    c_in, c_out = x[1], w[0]
    if group < 1 or c_in % group or c_out % group or w[1] * group != c_in:
        return "inconsistent channel grouping"
    return {
        "name": name,
        "kind": "conv2d",
        "input_h": x[2],
        "input_w": x[3],
        "c_in": c_in,
        "c_out": c_out,
        "kernel_h": kernel[0],
        "kernel_w": kernel[1],
        "stride_h": strides[0],
        "stride_w": strides[1],
        "dilation_h": dilations[0],
        "dilation_w": dilations[1],
        "pad_h": pads[0][0],
        "pad_w": pads[1][0],
        "groups": group,
    }


def _dense_layer(state: ShapeState, node: Node, name: str):
    w = state.shape(node.inputs[1])
    if w is None or len(w) != 2:
        return "no static 2-D weight"
    if node.op_type == "Gemm":
        if node.attr_int("transA", 0):
            return "transposed activation operand"
        c_in, c_out = (w[1], w[0]) if node.attr_int("transB", 0) else (w[0], w[1])
    else:
        if node.inputs[1] not in state.graph.initializers:
            return "weight is not a graph constant"
        c_in, c_out = w[0], w[1]
    x = state.shape(node.inputs[0])
    if x is None:
        return "unresolved input shape"
    if x[-1] != c_in:
        return "activation/weight dimension mismatch"
    return {
        "name": name,
        "kind": "fully_connected",
        "input_h": 1, "input_w": 1,
        "c_in": c_in, "c_out": c_out,
        "kernel_h": 1, "kernel_w": 1,
        "stride_h": 1, "stride_w": 1,
        "dilation_h": 1, "dilation_w": 1,
        "pad_h": 0, "pad_w": 0,
        "groups": 1,
    }


def extract_graph(graph: Graph, model_name: str, input_h: int, input_w: int):
    """(network spec dict, ExtractionReport) for one parsed graph."""
    state = ShapeState(graph, (input_h, input_w))
    primary_inputs = [i for i in graph.inputs if i.name not in graph.initializers]
    if not primary_inputs or state.shape(primary_inputs[0].name) is None:
        raise DynamicShape(
            "graph input shape cannot be resolved to static dimensions"
        )
    state.run()
    report = ExtractionReport()
    layers = []
    for index, node in enumerate(graph.nodes):
        if node.op_type in ("Conv", "Gemm", "MatMul"):
            name = _layer_name(node, index)
            if node.op_type == "Conv":
                layer = _conv_layer(state, node, name)
            else:
                layer = _dense_layer(state, node, name)
            if isinstance(layer, str):
                report.skip(node, layer if layer != "3D convolution"
                            else UNSUPPORTED + ": 3D convolution")
            else:
                layers.append(layer)
                report.layers_emitted += 1
        elif node.op_type == "Constant":
            continue  # graph plumbing, not an activation-path node
        elif node.op_type in ("ConvTranspose", "LSTM", "GRU", "RNN", "Loop",
                              "If", "Scan"):
            report.skip(node, UNSUPPORTED)
        else:
            report.skip(node, NO_WORKLOAD)
    spec = {
        "model_name": model_name,
        "input_h": input_h,
        "input_w": input_w,
        "layers": [
            {key: layer[key] for key in _LAYER_FIELD_ORDER} for layer in layers
        ],
    }
    return spec, report


def extract_file(path: str | Path, input_h: int, input_w: int,
                 model_name: str | None = None):
    """Parse one ONNX file and extract its layer-spec network description."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ExtractionError(f"cannot read {path}: {exc}") from exc
    try:
        model = parse_model(data)
    except ValueError as exc:
        raise ExtractionError(f"{path} is not a readable ONNX file: {exc}") from exc
    name = model_name or path.stem
    return extract_graph(model.graph, name, input_h, input_w)
