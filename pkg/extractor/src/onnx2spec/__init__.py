"""ONNX-to-layer-spec extractor."""

from .extract import (
    DynamicShape,
    ExtractionError,
    ExtractionReport,
    extract_file,
    extract_graph,
)
from .proto import parse_model

__version__ = "0.1.0"

__all__ = [
    "DynamicShape",
    "ExtractionError",
    "ExtractionReport",
    "extract_file",
    "extract_graph",
    "parse_model",
]
