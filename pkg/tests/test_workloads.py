"""Layer lowering, network validation, and the canned model set."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysolve import models
from sysolve.errors import DegenerateOutput, InvalidLayer, InvalidNetwork
from sysolve.workloads import (
    GemmWorkload,
    LayerSpec,
    NetworkSpec,
    load_network,
    lower_layer,
    lower_network,
    network_from_dict,
    network_to_dict,
)


def conv(name="conv", **kw):
    base = dict(
        name=name, kind="conv2d", input_h=8, input_w=8, c_in=4, c_out=4,
        kernel_h=3, kernel_w=3, pad_h=1, pad_w=1,
    )
    base.update(kw)
    return LayerSpec(**base)


class TestLowerLayer:
    def test_conv_3x3_im2col(self):
        layer = conv(input_h=56, input_w=56, c_in=64, c_out=64)
        assert lower_layer(layer) == GemmWorkload(
            m=3136, k=576, n=64, repeat=1, source_layer="conv"
        )

    def test_depthwise_conv(self):
        layer = conv(input_h=112, input_w=112, c_in=32, c_out=32, groups=32)
        workload = lower_layer(layer)
        assert (workload.m, workload.k, workload.n, workload.repeat) == (12544, 9, 1, 32)

    def test_fully_connected(self):
        layer = LayerSpec(name="fc", kind="fully_connected", input_h=1, input_w=1,
                          c_in=2048, c_out=1000)
        workload = lower_layer(layer)
        assert (workload.m, workload.k, workload.n, workload.repeat) == (1, 2048, 1000, 1)

    def test_strided_dilated(self):
        layer = conv(input_h=17, input_w=23, stride_h=2, stride_w=3,
                     dilation_h=2, dilation_w=1, pad_h=2, pad_w=0)
        # out_h = (17 + 4 - 2*2 - 1)//2 + 1 = 9, out_w = (23 - 3)//3 + 1 = 7
        assert (layer.out_h, layer.out_w) == (9, 7)
        assert lower_layer(layer).m == 63

    def test_degenerate_output_rejected(self):
        with pytest.raises(DegenerateOutput):
            conv(input_h=2, input_w=2, kernel_h=5, kernel_w=5, pad_h=0, pad_w=0)

    def test_groups_must_divide(self):
        with pytest.raises(InvalidLayer):
            conv(c_in=6, c_out=4, groups=4)

    def test_fc_shape_fields_must_be_one(self):
        with pytest.raises(InvalidLayer):
            LayerSpec(name="fc", kind="fully_connected", input_h=7, input_w=7,
                      c_in=64, c_out=10)


class TestLowerNetwork:
    def test_order_preserved(self):
        net = NetworkSpec(
            model_name="two", input_h=8, input_w=8,
            layers=(conv("a"), LayerSpec(name="b", kind="fully_connected",
                                         input_h=1, input_w=1, c_in=4, c_out=2)),
        )
        workloads = lower_network(net)
        assert [w.source_layer for w in workloads] == ["a", "b"]
        assert sum(w.macs for w in workloads) == net.macs

    def test_empty_network_rejected(self):
        with pytest.raises(InvalidNetwork):
            NetworkSpec(model_name="empty", input_h=8, input_w=8, layers=())


# Layer strategy: channels are per-group multiples so grouping stays legal.
layer_specs = st.builds(
    lambda g, cig, cog, kh, kw, sh, sw, dh, dw, ph, pw, extra_h, extra_w: LayerSpec(
        name="gen", kind="conv2d",
        input_h=dh * (kh - 1) + 1 + extra_h,
        input_w=dw * (kw - 1) + 1 + extra_w,
        c_in=g * cig, c_out=g * cog,
        kernel_h=kh, kernel_w=kw, stride_h=sh, stride_w=sw,
        dilation_h=dh, dilation_w=dw, pad_h=ph, pad_w=pw, groups=g,
    ),
    g=st.integers(1, 8),
    cig=st.integers(1, 8),
    cog=st.integers(1, 8),
    kh=st.integers(1, 5),
    kw=st.integers(1, 5),
    sh=st.integers(1, 3),
    sw=st.integers(1, 3),
    dh=st.integers(1, 2),
    dw=st.integers(1, 2),
    ph=st.integers(0, 2),
    pw=st.integers(0, 2),
    extra_h=st.integers(0, 20),
    extra_w=st.integers(0, 20),
)


class TestLoweringProperties:
    @given(layer_specs)
    def test_mac_conservation(self, layer):
        workload = lower_layer(layer)
        direct = (layer.out_h * layer.out_w * layer.kernel_h * layer.kernel_w
                  * (layer.c_in // layer.groups) * layer.c_out)
        assert workload.m * workload.k * workload.n * workload.repeat == direct

    @given(layer_specs)
    def test_group_doubling(self, layer):
        doubled_groups = layer.groups * 2
        if layer.c_in % doubled_groups or layer.c_out % doubled_groups:
            return
        doubled = LayerSpec(**{**_fields(layer), "groups": doubled_groups})
        a, b = lower_layer(layer), lower_layer(doubled)
        assert b.m == a.m
        assert b.k * 2 == a.k
        assert b.n * 2 == a.n
        assert b.repeat == a.repeat * 2

    @given(layer_specs, st.integers(1, 3))
    def test_stride_monotonicity(self, layer, bump):
        wider = LayerSpec(**{**_fields(layer), "stride_h": layer.stride_h + bump})
        assert lower_layer(wider).m <= lower_layer(layer).m

    @given(layer_specs)
    def test_lowering_is_pure(self, layer):
        twin = LayerSpec(**_fields(layer))
        assert lower_layer(layer) == lower_layer(twin)


def _fields(layer):
    return {
        "name": layer.name, "kind": layer.kind,
        "input_h": layer.input_h, "input_w": layer.input_w,
        "c_in": layer.c_in, "c_out": layer.c_out,
        "kernel_h": layer.kernel_h, "kernel_w": layer.kernel_w,
        "stride_h": layer.stride_h, "stride_w": layer.stride_w,
        "dilation_h": layer.dilation_h, "dilation_w": layer.dilation_w,
        "pad_h": layer.pad_h, "pad_w": layer.pad_w, "groups": layer.groups,
    }


class TestJsonSchema:
    def test_round_trip(self, tmp_path):
        net = NetworkSpec(model_name="rt", input_h=8, input_w=8, layers=(conv(),))
        data = network_to_dict(net)
        assert network_from_dict(json.loads(json.dumps(data))) == net

    def test_unknown_field_rejected(self):
        data = network_to_dict(
            NetworkSpec(model_name="x", input_h=8, input_w=8, layers=(conv(),))
        )
        data["layers"][0]["bias"] = True
        with pytest.raises(InvalidNetwork, match="bias"):
            network_from_dict(data)

    def test_missing_field_named(self):
        data = network_to_dict(
            NetworkSpec(model_name="x", input_h=8, input_w=8, layers=(conv(),))
        )
        del data["layers"][0]["groups"]
        with pytest.raises(InvalidNetwork, match="groups"):
            network_from_dict(data)

    def test_non_integer_field_named(self, tmp_path):
        data = network_to_dict(
            NetworkSpec(model_name="x", input_h=8, input_w=8, layers=(conv(),))
        )
        data["layers"][0]["c_in"] = "four"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(InvalidNetwork, match="c_in"):
            load_network(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidNetwork):
            load_network(tmp_path / "nonexistent.json")


# Frozen from the independent per-layer MAC formula script over each
# reference layer table (tools/build_model_specs.py) at 224x224 input.
CANNED_EXPECTATIONS = {
    "alexnet": (8, 714_188_480),
    "bn_inception": (70, 2_018_851_840),
    "densenet121": (121, 2_834_161_664),
    "efficientnet_b0": (82, 385_814_752),
    "googlenet": (58, 1_498_376_192),
    "mobilenet_v3_large": (64, 216_589_760),
    "resnet152": (156, 11_513_626_624),
    "resnext152_32x4d": (156, 11_709_513_728),
    "vgg16": (16, 15_470_264_320),
}


class TestCannedModels:
    def test_full_model_set_present(self):
        assert models.available() == sorted(CANNED_EXPECTATIONS)

    @pytest.mark.parametrize("name", sorted(CANNED_EXPECTATIONS))
    def test_layer_count_and_macs(self, name):
        net = models.load(name)
        workloads = lower_network(net)
        layers, macs = CANNED_EXPECTATIONS[name]
        assert len(workloads) == layers
        # Dual route: direct per-layer formula vs lowered m*k*n*repeat.
        assert net.macs == macs
        assert sum(w.macs for w in workloads) == macs

    def test_resnet152_magnitude(self):
        # All conv and FC layers of the 152-layer residual model, 224x224.
        net = models.load("resnet152")
        assert 10e9 < net.macs < 12e9
        assert len(net.layers) == 156

    def test_resnext_grouping(self):
        net = models.load("resnext152_32x4d")
        assert max(layer.groups for layer in net.layers) == 32

    def test_manifest_matches(self):
        manifest = models.manifest()
        for name, (layers, macs) in CANNED_EXPECTATIONS.items():
            entry = manifest["models"][name]
            assert entry["layers"] == layers
            assert entry["total_macs"] == macs
