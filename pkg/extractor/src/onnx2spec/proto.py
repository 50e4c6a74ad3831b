"""Minimal protobuf wire-format reader for ONNX model files.

Only the slice of the ONNX schema needed to walk a graph is decoded:
nodes with attributes, initializer tensor headers, and value-info shapes.
Field numbers follow the public onnx.proto definition.  No protobuf
runtime is required.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field


class ProtoError(ValueError):
    """The file is not a readable ONNX protobuf."""


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise ProtoError("truncated varint")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise ProtoError("varint too long")


def _signed64(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def fields_of(buf: bytes):
    """Yield (field_number, wire_type, value) triples of one message."""
    pos = 0
    while pos < len(buf):
        tag, pos = _read_varint(buf, pos)
        number, wire = tag >> 3, tag & 7
        if wire == 0:
            value, pos = _read_varint(buf, pos)
        elif wire == 1:
            value = buf[pos:pos + 8]
            pos += 8
        elif wire == 2:
            size, pos = _read_varint(buf, pos)
            value = buf[pos:pos + size]
            if len(value) != size:
                raise ProtoError("truncated length-delimited field")
            pos += size
        elif wire == 5:
            value = buf[pos:pos + 4]
            pos += 4
        else:
            raise ProtoError(f"unsupported wire type {wire}")
        yield number, wire, value


def _packed_int64s(wire: int, value) -> list[int]:
    if wire == 0:
        return [_signed64(value)]
    out = []
    pos = 0
    while pos < len(value):
        raw, pos = _read_varint(value, pos)
        out.append(_signed64(raw))
    return out


@dataclass
class Tensor:
    """Header plus raw payload of one TensorProto."""

    name: str = ""
    dims: list[int] = field(default_factory=list)
    data_type: int = 0
    raw_data: bytes = b""
    int64_data: list[int] = field(default_factory=list)
    int32_data: list[int] = field(default_factory=list)

    def int_values(self) -> list[int]:
        """Integer payload (for shape/pads constants)."""
        if self.int64_data:
            return list(self.int64_data)
        if self.int32_data:
            return list(self.int32_data)
        if self.raw_data:
            if self.data_type == 7:  # INT64
                count = len(self.raw_data) // 8
                return list(struct.unpack(f"<{count}q", self.raw_data[:count * 8]))
            if self.data_type == 6:  # INT32
                count = len(self.raw_data) // 4
                return list(struct.unpack(f"<{count}i", self.raw_data[:count * 4]))
        return []


def _parse_tensor(buf: bytes) -> Tensor:
    tensor = Tensor()
    for number, wire, value in fields_of(buf):
        if number == 1:
            tensor.dims.extend(_packed_int64s(wire, value))
        elif number == 2 and wire == 0:
            tensor.data_type = value
        elif number == 5:
            tensor.int32_data.extend(_packed_int64s(wire, value))
        elif number == 7:
            tensor.int64_data.extend(_packed_int64s(wire, value))
        elif number == 8 and wire == 2:
            tensor.name = value.decode("utf-8", "replace")
        elif number == 9 and wire == 2:
            tensor.raw_data = value
    return tensor


@dataclass
class Attribute:
    name: str = ""
    type: int = 0
    i: int = 0
    f: float = 0.0
    s: bytes = b""
    ints: list[int] = field(default_factory=list)
    tensor: Tensor | None = None


def _parse_attribute(buf: bytes) -> Attribute:
    attr = Attribute()
    for number, wire, value in fields_of(buf):
        if number == 1 and wire == 2:
            attr.name = value.decode("utf-8", "replace")
        elif number == 2 and wire == 5:
            attr.f = struct.unpack("<f", value)[0]
        elif number == 3 and wire == 0:
            attr.i = _signed64(value)
        elif number == 4 and wire == 2:
            attr.s = value
        elif number == 5 and wire == 2:
            attr.tensor = _parse_tensor(value)
        elif number == 8:
            attr.ints.extend(_packed_int64s(wire, value))
        elif number == 20 and wire == 0:
            attr.type = value
    return attr


@dataclass
class Node:
    op_type: str = ""
    name: str = ""
    domain: str = ""
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    attributes: dict[str, Attribute] = field(default_factory=dict)

    def attr_ints(self, name: str, default=None) -> list[int] | None:
        attr = self.attributes.get(name)
        return list(attr.ints) if attr is not None else default

    def attr_int(self, name: str, default: int = 0) -> int:
        attr = self.attributes.get(name)
        return attr.i if attr is not None else default

    def attr_str(self, name: str, default: str = "") -> str:
        attr = self.attributes.get(name)
        return attr.s.decode("utf-8", "replace") if attr is not None else default


def _parse_node(buf: bytes) -> Node:
    node = Node()
    for number, wire, value in fields_of(buf):
        if number == 1 and wire == 2:
            node.inputs.append(value.decode("utf-8", "replace"))
        elif number == 2 and wire == 2:
            node.outputs.append(value.decode("utf-8", "replace"))
        elif number == 3 and wire == 2:
            node.name = value.decode("utf-8", "replace")
        elif number == 4 and wire == 2:
            node.op_type = value.decode("utf-8", "replace")
        elif number == 5 and wire == 2:
            attr = _parse_attribute(value)
            node.attributes[attr.name] = attr
        elif number == 7 and wire == 2:
            node.domain = value.decode("utf-8", "replace")
    return node


#: Shape dimension: an int, a symbolic name, or None when absent entirely.
Dim = int | str | None


@dataclass
class ValueInfo:
    name: str = ""
    shape: list[Dim] | None = None


def _parse_dims(buf: bytes) -> list[Dim]:
    dims: list[Dim] = []
    for number, _wire, value in fields_of(buf):
        if number != 1:
            continue
        dim: Dim = None
        for inner, iw, ival in fields_of(value):
            if inner == 1 and iw == 0:
                dim = _signed64(ival)
            elif inner == 2 and iw == 2:
                dim = ival.decode("utf-8", "replace")
        dims.append(dim)
    return dims


def _parse_value_info(buf: bytes) -> ValueInfo:
    info = ValueInfo()
    for number, wire, value in fields_of(buf):
        if number == 1 and wire == 2:
            info.name = value.decode("utf-8", "replace")
        elif number == 2 and wire == 2:
            for tnum, tw, tval in fields_of(value):  # TypeProto
                if tnum == 1 and tw == 2:  # tensor_type
                    for snum, sw, sval in fields_of(tval):
                        if snum == 2 and sw == 2:  # shape
                            info.shape = _parse_dims(sval)
    return info


@dataclass
class Graph:
    name: str = ""
    nodes: list[Node] = field(default_factory=list)
    initializers: dict[str, Tensor] = field(default_factory=dict)
    inputs: list[ValueInfo] = field(default_factory=list)
    outputs: list[ValueInfo] = field(default_factory=list)
    value_infos: list[ValueInfo] = field(default_factory=list)


def _parse_graph(buf: bytes) -> Graph:
    graph = Graph()
    for number, wire, value in fields_of(buf):
        if number == 1 and wire == 2:
            graph.nodes.append(_parse_node(value))
        elif number == 2 and wire == 2:
            graph.name = value.decode("utf-8", "replace")
        elif number == 5 and wire == 2:
            tensor = _parse_tensor(value)
            graph.initializers[tensor.name] = tensor
        elif number == 11 and wire == 2:
            graph.inputs.append(_parse_value_info(value))
        elif number == 12 and wire == 2:
            graph.outputs.append(_parse_value_info(value))
        elif number == 13 and wire == 2:
            graph.value_infos.append(_parse_value_info(value))
    return graph


@dataclass
class Model:
    ir_version: int = 0
    producer: str = ""
    graph: Graph = field(default_factory=Graph)


def parse_model(data: bytes) -> Model:
    """Decode the ONNX ModelProto header and its graph."""
    model = Model()
    seen_graph = False
    for number, wire, value in fields_of(data):
        if number == 1 and wire == 0:
            model.ir_version = value
        elif number == 2 and wire == 2:
            model.producer = value.decode("utf-8", "replace")
        elif number == 7 and wire == 2:
            model.graph = _parse_graph(value)
            seen_graph = True
    if not seen_graph:
        raise ProtoError("no graph found; not an ONNX model file?")
    return model
