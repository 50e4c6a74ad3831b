"""Layer/network descriptions and their lowering to GEMM workloads.

Convolutions are lowered with im2col semantics: each output pixel becomes one
activation row of the GEMM, the unrolled receptive field forms the reduction
axis, and output channels form the feature axis.  Grouped convolutions lower
to ``groups`` serialized identical GEMMs (``repeat``), each over one channel
group.  Batch size is fixed at 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable

from .errors import DegenerateOutput, InvalidLayer, InvalidNetwork

LAYER_KINDS = ("conv2d", "fully_connected")


@dataclass(frozen=True)
class LayerSpec:
    """One conv2d or fully-connected layer with explicit input size.

    Input sizes are carried per layer rather than inferred from the
    predecessor: branching topologies (skip connections, concatenations)
    flatten to an ordered layer list whose cost is additive, so only the
    operand shapes matter.
    """

    name: str
    kind: str
    input_h: int
    input_w: int
    c_in: int
    c_out: int
    kernel_h: int = 1
    kernel_w: int = 1
    stride_h: int = 1
    stride_w: int = 1
    dilation_h: int = 1
    dilation_w: int = 1
    pad_h: int = 0
    pad_w: int = 0
    groups: int = 1

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise InvalidLayer(f"layer {self.name!r}: unknown kind {self.kind!r}")
        positive = (
            "input_h", "input_w", "c_in", "c_out", "kernel_h", "kernel_w",
            "stride_h", "stride_w", "dilation_h", "dilation_w", "groups",
        )
        for field in positive:
            if getattr(self, field) < 1:
                raise InvalidLayer(f"layer {self.name!r}: {field} must be >= 1")
        if self.pad_h < 0 or self.pad_w < 0:
            raise InvalidLayer(f"layer {self.name!r}: padding must be >= 0")
        if self.c_in % self.groups or self.c_out % self.groups:
            raise InvalidLayer(
                f"layer {self.name!r}: groups={self.groups} must divide "
                f"c_in={self.c_in} and c_out={self.c_out}"
            )
        if self.kind == "fully_connected":
            ones = (
                "input_h", "input_w", "kernel_h", "kernel_w",
                "stride_h", "stride_w", "dilation_h", "dilation_w", "groups",
            )
            for field in ones:
                if getattr(self, field) != 1:
                    raise InvalidLayer(
                        f"layer {self.name!r}: fully_connected requires {field} == 1"
                    )
            if self.pad_h or self.pad_w:
                raise InvalidLayer(
                    f"layer {self.name!r}: fully_connected requires zero padding"
                )
        if self.out_h < 1 or self.out_w < 1:
            raise DegenerateOutput(
                f"layer {self.name!r}: output size {self.out_h}x{self.out_w} "
                "is degenerate"
            )

    @property
    def out_h(self) -> int:
        eff = self.dilation_h * (self.kernel_h - 1) + 1
        return (self.input_h + 2 * self.pad_h - eff) // self.stride_h + 1

    @property
    def out_w(self) -> int:
        eff = self.dilation_w * (self.kernel_w - 1) + 1
        return (self.input_w + 2 * self.pad_w - eff) // self.stride_w + 1

    @property
    def macs(self) -> int:
        """MAC count from the direct convolution formula (lowering oracle)."""
        return (
            self.out_h * self.out_w * self.kernel_h * self.kernel_w
            * (self.c_in // self.groups) * self.c_out
        )


@dataclass(frozen=True)
class NetworkSpec:
    """An ordered list of layers making up one model."""

    model_name: str
    input_h: int
    input_w: int
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        if not self.layers:
            raise InvalidNetwork(f"network {self.model_name!r}: empty layer list")
        if self.input_h < 1 or self.input_w < 1:
            raise InvalidNetwork(f"network {self.model_name!r}: input size must be >= 1")

    @property
    def macs(self) -> int:
        return sum(layer.macs for layer in self.layers)


@dataclass(frozen=True)
class GemmWorkload:
    """An (m, k, n) matrix multiplication repeated ``repeat`` times.

    ``m`` counts streamed activation rows, ``k`` the reduction axis
    (stationary tile height), ``n`` the output features (stationary tile
    width).  ``repeat`` > 1 models the per-group serialization of grouped
    convolutions.
    """

    m: int
    k: int
    n: int
    repeat: int = 1
    source_layer: str = ""

    def __post_init__(self):
        for field in ("m", "k", "n", "repeat"):
            if getattr(self, field) < 1:
                raise InvalidLayer(f"workload {self.source_layer!r}: {field} must be >= 1")

    @property
    def macs(self) -> int:
        return self.m * self.k * self.n * self.repeat


def lower_layer(layer: LayerSpec) -> GemmWorkload:
    """Lower one layer to its GEMM workload (im2col for conv2d)."""
    if layer.kind == "fully_connected":
        workload = GemmWorkload(
            m=1, k=layer.c_in, n=layer.c_out, repeat=1, source_layer=layer.name
        )
    else:
        workload = GemmWorkload(
            m=layer.out_h * layer.out_w,
            k=layer.kernel_h * layer.kernel_w * (layer.c_in // layer.groups),
            n=layer.c_out // layer.groups,
            repeat=layer.groups,
            source_layer=layer.name,
        )
    # Conservation against the direct convolution MAC formula.
    assert workload.macs == layer.macs
    return workload


def lower_network(net: NetworkSpec) -> list[GemmWorkload]:
    """Lower every layer in order, attaching layer names to any failure."""
    out = []
    for layer in net.layers:
        try:
            out.append(lower_layer(layer))
        except InvalidLayer as exc:
            raise InvalidLayer(f"while lowering layer {layer.name!r}: {exc}") from exc
    return out


_LAYER_FIELDS = tuple(f.name for f in fields(LayerSpec))
_NETWORK_FIELDS = ("model_name", "input_h", "input_w", "layers")


def _check_fields(obj: dict, allowed: Iterable[str], context: str) -> None:
    allowed = tuple(allowed)
    for key in obj:
        if key not in allowed:
            raise InvalidNetwork(f"{context}: unknown field {key!r}")
    for key in allowed:
        if key not in obj:
            raise InvalidNetwork(f"{context}: missing field {key!r}")


def network_from_dict(data: dict) -> NetworkSpec:
    """Build a NetworkSpec from parsed JSON, rejecting unknown fields."""
    if not isinstance(data, dict):
        raise InvalidNetwork("network spec: top-level value must be an object")
    _check_fields(data, _NETWORK_FIELDS, "network spec")
    if not isinstance(data["model_name"], str):
        raise InvalidNetwork("network spec: field 'model_name' must be a string")
    for key in ("input_h", "input_w"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise InvalidNetwork(f"network spec: field {key!r} must be an integer")
    if not isinstance(data["layers"], list):
        raise InvalidNetwork("network spec: field 'layers' must be a list")
    layers = []
    for index, entry in enumerate(data["layers"]):
        context = f"layer #{index}"
        if not isinstance(entry, dict):
            raise InvalidNetwork(f"{context}: must be an object")
        _check_fields(entry, _LAYER_FIELDS, context)
        if not isinstance(entry["name"], str) or not isinstance(entry["kind"], str):
            raise InvalidNetwork(f"{context}: 'name' and 'kind' must be strings")
        for key in _LAYER_FIELDS:
            if key in ("name", "kind"):
                continue
            if not isinstance(entry[key], int) or isinstance(entry[key], bool):
                raise InvalidNetwork(f"{context}: field {key!r} must be an integer")
        layers.append(LayerSpec(**entry))
    return NetworkSpec(
        model_name=data["model_name"],
        input_h=data["input_h"],
        input_w=data["input_w"],
        layers=tuple(layers),
    )


def network_to_dict(net: NetworkSpec) -> dict:
    return {
        "model_name": net.model_name,
        "input_h": net.input_h,
        "input_w": net.input_w,
        "layers": [
            {name: getattr(layer, name) for name in _LAYER_FIELDS}
            for layer in net.layers
        ],
    }


def load_network(path: str | Path) -> NetworkSpec:
    """Load and validate a layer-spec JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidNetwork(f"cannot read model file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidNetwork(f"model file {path} is not valid JSON: {exc}") from exc
    return network_from_dict(data)


def save_network(net: NetworkSpec, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(network_to_dict(net), indent=1) + "\n", encoding="utf-8"
    )
