"""Static shape propagation over a parsed ONNX graph.

Walks the node list in graph order, keeping a map from tensor name to a
concrete NCHW-style shape tuple (or None where a shape cannot be
determined).  Covers the operator set found in exported CNN classifiers;
anything else simply yields unknown shapes, which the extractor reports
per node instead of failing the whole model.
"""

from __future__ import annotations

import math

from .proto import Graph, Node, Tensor

_PASSTHROUGH = {
    "Relu", "LeakyRelu", "PRelu", "Sigmoid", "HardSigmoid", "HardSwish",
    "Softplus", "Softsign", "Tanh", "Clip", "Elu", "Selu", "Celu", "Exp",
    "Log", "Neg", "Abs", "Floor", "Ceil", "Round", "Erf", "Softmax",
    "LogSoftmax", "Identity", "Cast", "Dropout", "BatchNormalization",
    "InstanceNormalization", "LpNormalization", "LRN", "Shrink", "Mish",
}

_BROADCAST = {"Add", "Sub", "Mul", "Div", "Pow", "Min", "Max", "Mod",
              "And", "Or", "Xor", "Equal", "Greater", "Less", "Where"}


def _broadcast(a, b):
    if a is None or b is None:
        return None
    rev_a, rev_b = list(a)[::-1], list(b)[::-1]
    out = []
    for i in range(max(len(rev_a), len(rev_b))):
        x = rev_a[i] if i < len(rev_a) else 1
        y = rev_b[i] if i < len(rev_b) else 1
        if x == 1:
            out.append(y)
        elif y == 1 or x == y:
            out.append(x)
        else:
            return None
    return tuple(out[::-1])


def _pool_output(in_size, kernel, stride, pad_b, pad_e, dilation, ceil_mode):
    numer = in_size + pad_b + pad_e - dilation * (kernel - 1) - 1
    if numer < 0:
        return None
    if ceil_mode:
        return -(-numer // stride) + 1
    return numer // stride + 1


def resolve_conv_pads(node: Node, in_spatial, kernel, strides, dilations):
    """Explicit (begin, end) pads per spatial axis, honouring auto_pad."""
    rank = len(in_spatial)
    auto = node.attr_str("auto_pad", "NOTSET")
    if auto in ("", "NOTSET"):
        pads = node.attr_ints("pads", [0] * (2 * rank))
        return list(zip(pads[:rank], pads[rank:]))
    if auto == "VALID":
        return [(0, 0)] * rank
    out = []
    for axis in range(rank):
        out_size = math.ceil(in_spatial[axis] / strides[axis])
        eff = dilations[axis] * (kernel[axis] - 1) + 1
        total = max(0, (out_size - 1) * strides[axis] + eff - in_spatial[axis])
        small, big = total // 2, total - total // 2
        if auto == "SAME_UPPER":
            out.append((small, big))
        elif auto == "SAME_LOWER":
            out.append((big, small))
        else:
            return None
    return out


class ShapeState:
    """Known tensor shapes and constant integer payloads."""

    def __init__(self, graph: Graph, input_hw: tuple[int, int] | None):
        self.graph = graph
        self.shapes: dict[str, tuple[int, ...] | None] = {}
        self.constants: dict[str, list[int]] = {}
        for name, tensor in graph.initializers.items():
            self.shapes[name] = tuple(tensor.dims)
            values = tensor.int_values()
            if values or not tensor.dims:
                self.constants[name] = values
        for index, info in enumerate(graph.inputs):
            if info.name in graph.initializers:
                continue
            shape = self._resolve_input(info.shape, input_hw, primary=index == 0)
            self.shapes[info.name] = shape

    @staticmethod
    def _resolve_input(dims, input_hw, primary: bool):
        if dims is None:
            return None
        out = []
        for axis, dim in enumerate(dims):
            if isinstance(dim, int) and dim > 0:
                out.append(dim)
            elif axis == 0:
                out.append(1)  # batch is fixed at 1
            elif primary and input_hw is not None and len(dims) == 4 and axis in (2, 3):
                out.append(input_hw[axis - 2])
            else:
                return None
        if primary and input_hw is not None and len(out) == 4:
            out[2], out[3] = input_hw
        return tuple(out)

    def shape(self, name: str):
        return self.shapes.get(name)

    def constant(self, name: str):
        return self.constants.get(name)

    def run(self) -> None:
        for node in self.graph.nodes:
            try:
                self._apply(node)
            except Exception:
                for out in node.outputs:
                    self.shapes.setdefault(out, None)

    def _set(self, node: Node, shape) -> None:
        if node.outputs:
            self.shapes[node.outputs[0]] = tuple(shape) if shape else None
            for extra in node.outputs[1:]:
                self.shapes[extra] = None

    def _apply(self, node: Node) -> None:
        op = node.op_type
        get = self.shape
        if op in _PASSTHROUGH:
            self._set(node, get(node.inputs[0]))
        elif op in _BROADCAST:
            if len(node.inputs) >= 2:
                self._set(node, _broadcast(get(node.inputs[0]), get(node.inputs[1])))
            else:
                self._set(node, get(node.inputs[0]))
        elif op == "Constant":
            attr = node.attributes.get("value")
            if attr is not None and attr.tensor is not None:
                self._register_constant(node.outputs[0], attr.tensor)
            else:
                self._set(node, None)
        elif op in ("Conv", "ConvTranspose"):
            self._set(node, self._conv_shape(node) if op == "Conv" else None)
        elif op in ("MaxPool", "AveragePool", "LpPool"):
            self._set(node, self._pool_shape(node))
        elif op in ("GlobalAveragePool", "GlobalMaxPool", "GlobalLpPool"):
            shape = get(node.inputs[0])
            self._set(node, (shape[0], shape[1]) + (1,) * (len(shape) - 2)
                      if shape else None)
        elif op == "Concat":
            self._set(node, self._concat_shape(node))
        elif op == "Flatten":
            shape = get(node.inputs[0])
            if shape is None:
                self._set(node, None)
            else:
                axis = node.attr_int("axis", 1) % (len(shape) + 1)
                self._set(node, (math.prod(shape[:axis], start=1),
                                 math.prod(shape[axis:], start=1)))
        elif op == "Reshape":
            self._set(node, self._reshape_shape(node))
        elif op == "Squeeze":
            self._set(node, self._squeeze_shape(node))
        elif op == "Unsqueeze":
            self._set(node, self._unsqueeze_shape(node))
        elif op == "Transpose":
            shape = get(node.inputs[0])
            if shape is None:
                self._set(node, None)
            else:
                perm = node.attr_ints("perm", list(range(len(shape)))[::-1])
                self._set(node, tuple(shape[p] for p in perm))
        elif op == "Pad":
            self._set(node, self._pad_shape(node))
        elif op == "Gemm":
            self._set(node, self._gemm_shape(node))
        elif op == "MatMul":
            self._set(node, self._matmul_shape(node))
        elif op in ("ReduceMean", "ReduceSum", "ReduceMax", "ReduceMin"):
            self._set(node, self._reduce_shape(node))
        else:
            for out in node.outputs:
                self.shapes[out] = None

    def _register_constant(self, name: str, tensor: Tensor) -> None:
        self.shapes[name] = tuple(tensor.dims)
        values = tensor.int_values()
        if values or not tensor.dims:
            self.constants[name] = values

    def conv_geometry(self, node: Node):
        """(kernel, strides, dilations, pads, group) for a Conv node."""
        x = self.shape(node.inputs[0])
        w = self.shape(node.inputs[1])
        if x is None or w is None or len(x) < 3:
            return None
        spatial = x[2:]
        rank = len(spatial)
        kernel = node.attr_ints("kernel_shape", list(w[2:]))
        strides = node.attr_ints("strides", [1] * rank)
        dilations = node.attr_ints("dilations", [1] * rank)
        if not (len(kernel) == len(strides) == len(dilations) == rank):
            return None
        pads = resolve_conv_pads(node, spatial, kernel, strides, dilations)
        if pads is None:
            return None
        return kernel, strides, dilations, pads, node.attr_int("group", 1)

    def _conv_shape(self, node: Node):
        x = self.shape(node.inputs[0])
        w = self.shape(node.inputs[1])
        geometry = self.conv_geometry(node)
        if geometry is None:
            return None
        kernel, strides, dilations, pads, _group = geometry
        out = [x[0], w[0]]
        for axis in range(len(kernel)):
            size = _pool_output(x[2 + axis], kernel[axis], strides[axis],
                                pads[axis][0], pads[axis][1], dilations[axis],
                                ceil_mode=False)
            if size is None or size < 1:
                return None
            out.append(size)
        return out

    def _pool_shape(self, node: Node):
        x = self.shape(node.inputs[0])
        if x is None or len(x) < 3:
            return None
        spatial = x[2:]
        rank = len(spatial)
        kernel = node.attr_ints("kernel_shape")
        if kernel is None:
            return None
        strides = node.attr_ints("strides", [1] * rank)
        dilations = node.attr_ints("dilations", [1] * rank)
        pads = resolve_conv_pads(node, spatial, kernel, strides, dilations)
        if pads is None:
            return None
        ceil_mode = bool(node.attr_int("ceil_mode", 0))
        out = [x[0], x[1]]
        for axis in range(rank):
            size = _pool_output(spatial[axis], kernel[axis], strides[axis],
                                pads[axis][0], pads[axis][1], dilations[axis],
                                ceil_mode)
            if size is None or size < 1:
                return None
            out.append(size)
        return out

    def _concat_shape(self, node: Node):
        shapes = [self.shape(name) for name in node.inputs]
        if any(shape is None for shape in shapes):
            return None
        axis = node.attr_int("axis", 0) % len(shapes[0])
        out = list(shapes[0])
        out[axis] = sum(shape[axis] for shape in shapes)
        for shape in shapes[1:]:
            for i, (a, b) in enumerate(zip(out, shape)):
                if i != axis and a != b:
                    return None
        return out

    def _reshape_shape(self, node: Node):
        data = self.shape(node.inputs[0])
        target = self.constant(node.inputs[1]) if len(node.inputs) > 1 else None
        if data is None or target is None:
            return None
        out = []
        negative = None
        for i, dim in enumerate(target):
            if dim == 0:
                out.append(data[i])
            elif dim == -1:
                negative = i
                out.append(1)
            else:
                out.append(dim)
        if negative is not None:
            known = math.prod(out, start=1)
            total = math.prod(data, start=1)
            if known == 0 or total % known:
                return None
            out[negative] = total // known
        return out

    def _axes_of(self, node: Node):
        axes = node.attr_ints("axes")
        if axes is None and len(node.inputs) > 1:
            axes = self.constant(node.inputs[1])
        return axes

    def _squeeze_shape(self, node: Node):
        shape = self.shape(node.inputs[0])
        if shape is None:
            return None
        axes = self._axes_of(node)
        if axes is None:
            return [d for d in shape if d != 1]
        axes = {a % len(shape) for a in axes}
        return [d for i, d in enumerate(shape) if i not in axes]

    def _unsqueeze_shape(self, node: Node):
        shape = self.shape(node.inputs[0])
        axes = self._axes_of(node)
        if shape is None or axes is None:
            return None
        rank = len(shape) + len(axes)
        axes = sorted(a % rank for a in axes)
        out = list(shape)
        for axis in axes:
            out.insert(axis, 1)
        return out

    def _pad_shape(self, node: Node):
        shape = self.shape(node.inputs[0])
        if shape is None:
            return None
        pads = node.attr_ints("pads")
        if pads is None and len(node.inputs) > 1:
            pads = self.constant(node.inputs[1])
        if pads is None or len(pads) != 2 * len(shape):
            return None
        rank = len(shape)
        return [shape[i] + pads[i] + pads[rank + i] for i in range(rank)]

    def _gemm_shape(self, node: Node):
        a = self.shape(node.inputs[0])
        b = self.shape(node.inputs[1])
        if a is None or b is None or len(a) != 2 or len(b) != 2:
            return None
        m = a[1] if node.attr_int("transA", 0) else a[0]
        n = b[0] if node.attr_int("transB", 0) else b[1]
        return (m, n)

    def _matmul_shape(self, node: Node):
        a = self.shape(node.inputs[0])
        b = self.shape(node.inputs[1])
        if a is None or b is None or len(a) < 2 or len(b) != 2:
            return None
        return tuple(a[:-1]) + (b[1],)

    def _reduce_shape(self, node: Node):
        shape = self.shape(node.inputs[0])
        if shape is None:
            return None
        axes = self._axes_of(node)
        keep = bool(node.attr_int("keepdims", 1))
        if axes is None:
            return [1] * len(shape) if keep else []
        axes = {a % len(shape) for a in axes}
        out = []
        for i, d in enumerate(shape):
            if i in axes:
                if keep:
                    out.append(1)
            else:
                out.append(d)
        return out
