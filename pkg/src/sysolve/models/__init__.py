"""Canned layer-spec files for the standard CNN evaluation set.

The JSON files were produced by ``tools/build_model_specs.py`` from
reference model graphs; ``MANIFEST.json`` records the provenance and the
expected per-model layer counts and MAC totals.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..errors import InputError
from ..workloads import NetworkSpec, network_from_dict


def _root():
    return resources.files(__package__)


def available() -> list[str]:
    """Names of the canned models shipped with the package."""
    return sorted(
        entry.name[: -len(".json")]
        for entry in _root().iterdir()
        if entry.name.endswith(".json") and entry.name != "MANIFEST.json"
    )


def path(name: str) -> Path:
    """Filesystem path of one canned model file."""
    candidate = _root() / f"{name}.json"
    if not candidate.is_file():
        raise InputError(f"no canned model named {name!r}; have {available()}")
    return Path(str(candidate))


def load(name: str) -> NetworkSpec:
    """Load and validate one canned model."""
    return network_from_dict(json.loads(path(name).read_text(encoding="utf-8")))


def manifest() -> dict:
    return json.loads((_root() / "MANIFEST.json").read_text(encoding="utf-8"))
