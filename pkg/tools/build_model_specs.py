#!/usr/bin/env python3
"""Regenerate the canned layer-spec JSON files under src/sysolve/models/.

Layer tables are read out of reference torch model graphs with forward
hooks on every Conv2d/Linear module, in execution order, at 224x224 input.
BN-Inception is not shipped by torchvision, so a faithful module is built
here from the published architecture table.  Run from the repository root:

    python3 tools/build_model_specs.py
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

warnings.filterwarnings("ignore")

import torch
import torch.nn as nn

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sysolve.workloads import (  # noqa: E402
    LayerSpec,
    NetworkSpec,
    lower_network,
    network_to_dict,
)

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "sysolve" / "models"
INPUT_HW = (224, 224)


class _ConvBN(nn.Sequential):
    def __init__(self, c_in, c_out, kernel, stride=1, pad=0):
        super().__init__(
            nn.Conv2d(c_in, c_out, kernel, stride, pad, bias=False),
            nn.BatchNorm2d(c_out),
            nn.ReLU(inplace=True),
        )


class _Inception(nn.Module):
    """Standard four-branch block: 1x1, reduce+3x3, reduce+double-3x3, pool+proj."""

    def __init__(self, c_in, c1, r3, c3, rd3, cd3, proj, pool="avg"):
        super().__init__()
        self.branch1 = _ConvBN(c_in, c1, 1)
        self.branch2 = nn.Sequential(_ConvBN(c_in, r3, 1), _ConvBN(r3, c3, 3, 1, 1))
        self.branch3 = nn.Sequential(
            _ConvBN(c_in, rd3, 1), _ConvBN(rd3, cd3, 3, 1, 1), _ConvBN(cd3, cd3, 3, 1, 1)
        )
        pool_layer = nn.AvgPool2d(3, 1, 1) if pool == "avg" else nn.MaxPool2d(3, 1, 1)
        self.branch4 = nn.Sequential(pool_layer, _ConvBN(c_in, proj, 1))

    def forward(self, x):
        return torch.cat(
            [self.branch1(x), self.branch2(x), self.branch3(x), self.branch4(x)], 1
        )


class _InceptionDown(nn.Module):
    """Stride-2 block: reduce+3x3/2, reduce+double-3x3/2, max-pool passthrough."""

    def __init__(self, c_in, r3, c3, rd3, cd3):
        super().__init__()
        self.branch2 = nn.Sequential(_ConvBN(c_in, r3, 1), _ConvBN(r3, c3, 3, 2, 1))
        self.branch3 = nn.Sequential(
            _ConvBN(c_in, rd3, 1), _ConvBN(rd3, cd3, 3, 1, 1), _ConvBN(cd3, cd3, 3, 2, 1)
        )
        self.pool = nn.MaxPool2d(3, 2, ceil_mode=True)

    def forward(self, x):
        return torch.cat([self.branch2(x), self.branch3(x), self.pool(x)], 1)


class BNInception(nn.Module):
    """BN-Inception (the batch-normalized GoogLeNet revision), 224x224 input."""

    def __init__(self, classes=1000):
        super().__init__()
        self.stem = nn.Sequential(
            _ConvBN(3, 64, 7, 2, 3),
            nn.MaxPool2d(3, 2, ceil_mode=True),
            _ConvBN(64, 64, 1),
            _ConvBN(64, 192, 3, 1, 1),
            nn.MaxPool2d(3, 2, ceil_mode=True),
        )
        self.blocks = nn.Sequential(
            _Inception(192, 64, 64, 64, 64, 96, 32),
            _Inception(256, 64, 64, 96, 64, 96, 64),
            _InceptionDown(320, 128, 160, 64, 96),
            _Inception(576, 224, 64, 96, 96, 128, 128),
            _Inception(576, 192, 96, 128, 96, 128, 128),
            _Inception(576, 160, 128, 160, 128, 160, 96),
            _Inception(576, 96, 128, 192, 160, 192, 96),
            _InceptionDown(576, 128, 192, 192, 256),
            _Inception(1024, 352, 192, 320, 160, 224, 128),
            _Inception(1024, 352, 192, 320, 192, 224, 128, pool="max"),
        )
        self.head = nn.Sequential(
            nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(1024, classes)
        )

    def forward(self, x):
        return self.head(self.blocks(self.stem(x)))


def collect_layers(model: nn.Module) -> list[LayerSpec]:
    """Record every Conv2d/Linear in execution order via forward hooks."""
    rows: list[LayerSpec] = []
    handles = []

    def conv_hook(name):
        def hook(mod, inputs, _output):
            x = inputs[0]
            rows.append(LayerSpec(
                name=name, kind="conv2d",
                input_h=int(x.shape[2]), input_w=int(x.shape[3]),
                c_in=int(mod.in_channels), c_out=int(mod.out_channels),
                kernel_h=int(mod.kernel_size[0]), kernel_w=int(mod.kernel_size[1]),
                stride_h=int(mod.stride[0]), stride_w=int(mod.stride[1]),
                dilation_h=int(mod.dilation[0]), dilation_w=int(mod.dilation[1]),
                pad_h=int(mod.padding[0]), pad_w=int(mod.padding[1]),
                groups=int(mod.groups),
            ))
        return hook

    def linear_hook(name):
        def hook(mod, _inputs, _output):
            rows.append(LayerSpec(
                name=name, kind="fully_connected", input_h=1, input_w=1,
                c_in=int(mod.in_features), c_out=int(mod.out_features),
            ))
        return hook

    for name, mod in model.named_modules():
        if isinstance(mod, nn.Conv2d):
            if isinstance(mod.padding, str):
                raise ValueError(f"{name}: string padding is not supported")
            handles.append(mod.register_forward_hook(conv_hook(name)))
        elif isinstance(mod, nn.Linear):
            handles.append(mod.register_forward_hook(linear_hook(name)))
    model.eval()
    with torch.no_grad():
        model(torch.zeros(1, 3, INPUT_HW[0], INPUT_HW[1]))
    for handle in handles:
        handle.remove()
    return rows


def model_zoo():
    import torchvision.models as tvm
    from torchvision.models.resnet import Bottleneck, ResNet

    return {
        "alexnet": (tvm.alexnet, "torchvision.models.alexnet"),
        "vgg16": (tvm.vgg16, "torchvision.models.vgg16"),
        "googlenet": (
            lambda: tvm.googlenet(aux_logits=False, init_weights=True),
            "torchvision.models.googlenet (aux classifiers dropped)",
        ),
        "bn_inception": (
            BNInception,
            "hand-encoded from the published BN-Inception architecture table",
        ),
        "resnet152": (tvm.resnet152, "torchvision.models.resnet152"),
        "densenet121": (tvm.densenet121, "torchvision.models.densenet121"),
        "resnext152_32x4d": (
            lambda: ResNet(Bottleneck, [3, 8, 36, 3], groups=32, width_per_group=4),
            "torchvision ResNet backbone with [3,8,36,3] blocks, 32 groups, width 4",
        ),
        "mobilenet_v3_large": (
            tvm.mobilenet_v3_large, "torchvision.models.mobilenet_v3_large"
        ),
        "efficientnet_b0": (tvm.efficientnet_b0, "torchvision.models.efficientnet_b0"),
    }


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    manifest = {"input_h": INPUT_HW[0], "input_w": INPUT_HW[1], "models": {}}
    for name, (factory, provenance) in sorted(model_zoo().items()):
        layers = collect_layers(factory())
        net = NetworkSpec(
            model_name=name, input_h=INPUT_HW[0], input_w=INPUT_HW[1],
            layers=tuple(layers),
        )
        workloads = lower_network(net)
        assert sum(w.macs for w in workloads) == net.macs
        out = OUT_DIR / f"{name}.json"
        out.write_text(
            json.dumps(network_to_dict(net), indent=1) + "\n", encoding="utf-8"
        )
        manifest["models"][name] = {
            "source": provenance,
            "layers": len(layers),
            "total_macs": net.macs,
        }
        print(f"{name}: {len(layers)} layers, {net.macs} MACs -> {out.name}")
    (OUT_DIR / "MANIFEST.json").write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
