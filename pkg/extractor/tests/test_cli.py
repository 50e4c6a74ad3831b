"""Extractor command line: outputs, report files, exit codes."""

import json

import onnx_writer as ow
from onnx2spec.cli import main


def test_happy_path(tmp_path, capsys):
    model = tmp_path / "net.onnx"
    model.write_bytes(ow.single_conv_model())
    out = tmp_path / "spec.json"
    report = tmp_path / "report.json"
    code = main([str(model), "--input-size", "32x32", "--out", str(out),
                 "--report", str(report), "--model-name", "single_conv"])
    assert code == 0
    spec = json.loads(out.read_text())
    assert spec["model_name"] == "single_conv"
    assert len(spec["layers"]) == 1
    reported = json.loads(report.read_text())
    assert reported["layers_emitted"] == 1


def test_zero_layers_is_an_error(tmp_path):
    relu_only = ow.model(ow.graph(
        [ow.node("Relu", ["x"], ["y"])],
        inputs=[ow.value_info("x", [1, 3, 8, 8])],
        outputs=[ow.value_info("y", [1, 3, 8, 8])],
    ))
    model = tmp_path / "relu.onnx"
    model.write_bytes(relu_only)
    out = tmp_path / "spec.json"
    assert main([str(model), "--input-size", "8x8", "--out", str(out)]) == 1


def test_unreadable_file(tmp_path):
    model = tmp_path / "junk.onnx"
    model.write_bytes(b"\x00\x01garbage")
    assert main([str(model), "--out", str(tmp_path / "s.json")]) == 1


def test_bad_input_size(tmp_path):
    model = tmp_path / "net.onnx"
    model.write_bytes(ow.single_conv_model())
    assert main([str(model), "--input-size", "224", "--out",
                 str(tmp_path / "s.json")]) == 1
