#!/usr/bin/env python3
"""Export reference torchvision graphs to ONNX for extractor testing.

torch's exporter only imports the ``onnx`` package to splice in custom
onnxscript functions; plain CNN exports carry none, so that step is
patched to a passthrough and the serialized ModelProto is written as-is.

    python3 tools/export_onnx_fixtures.py [outdir] [model ...]
"""

from __future__ import annotations

import sys
import warnings
from pathlib import Path

warnings.filterwarnings("ignore")

import torch

from torch.onnx._internal.torchscript_exporter import onnx_proto_utils

onnx_proto_utils._add_onnxscript_fn = lambda model_bytes, custom_opsets: model_bytes

OPSET = 13


def exporters():
    import torchvision.models as tvm
    from torchvision.models.resnet import Bottleneck, ResNet

    return {
        "alexnet": tvm.alexnet,
        "vgg16": tvm.vgg16,
        "googlenet": lambda: tvm.googlenet(aux_logits=False, init_weights=True),
        "resnet152": tvm.resnet152,
        "densenet121": tvm.densenet121,
        "resnext152_32x4d": lambda: ResNet(Bottleneck, [3, 8, 36, 3],
                                           groups=32, width_per_group=4),
        "mobilenet_v3_large": tvm.mobilenet_v3_large,
        "efficientnet_b0": tvm.efficientnet_b0,
    }


def export(name: str, factory, outdir: Path) -> Path:
    model = factory()
    model.eval()
    path = outdir / f"{name}.onnx"
    with torch.no_grad():
        torch.onnx.export(
            model, torch.zeros(1, 3, 224, 224), str(path),
            opset_version=OPSET, do_constant_folding=True, dynamo=False,
        )
    return path


def main() -> int:
    args = sys.argv[1:]
    outdir = Path(args[0]) if args else Path("/tmp/onnx_fixtures")
    wanted = args[1:] or sorted(exporters())
    outdir.mkdir(parents=True, exist_ok=True)
    table = exporters()
    for name in wanted:
        path = export(name, table[name], outdir)
        print(f"{name}: {path} ({path.stat().st_size // 1024} KiB)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
