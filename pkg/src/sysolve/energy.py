"""Normalized data-movement energy model.

The cost of a run is a dimensionless weighted sum of the four access
classes:

    E = 6*m_ub + 2*(m_inter_pe + m_aa) + m_intra_pe

with the default weights reflecting the relative energy of a unified-buffer
access, a neighbour-register access, an array-to-accumulator transfer, and
an in-PE register access.  The weights are overridable (e.g. for a
different technology node); all arithmetic is exact rational.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TypeVar

from .core import MovementCounters
from .errors import EmptyInput, InputError, NonPositiveMetric

K = TypeVar("K")


@dataclass(frozen=True)
class EnergyWeights:
    """Per-access-class weights of the movement cost model."""

    ub_weight: Fraction = Fraction(6)
    inter_pe_weight: Fraction = Fraction(2)
    aa_weight: Fraction = Fraction(2)
    intra_pe_weight: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("ub_weight", "inter_pe_weight", "aa_weight", "intra_pe_weight"):
            value = Fraction(getattr(self, name))
            if value <= 0:
                raise InputError(f"{name} must be > 0")
            object.__setattr__(self, name, value)


DEFAULT_WEIGHTS = EnergyWeights()

_WEIGHT_KEYS = {
    "ub": "ub_weight",
    "inter_pe": "inter_pe_weight",
    "aa": "aa_weight",
    "intra_pe": "intra_pe_weight",
}


def load_weights(path: str | Path) -> EnergyWeights:
    """Read a weights override file: {"ub": 6, "inter_pe": 2, "aa": 2, "intra_pe": 1}."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read weights file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"weights file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("weights file: top-level value must be an object")
    kwargs = {}
    for key, value in data.items():
        if key not in _WEIGHT_KEYS:
            raise InputError(f"weights file: unknown key {key!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InputError(f"weights file: value for {key!r} must be a number")
        kwargs[_WEIGHT_KEYS[key]] = Fraction(value)
    return EnergyWeights(**kwargs)


def energy_cost(
    counters: MovementCounters, weights: EnergyWeights = DEFAULT_WEIGHTS
) -> Fraction:
    """Weighted data-movement cost of one run (dimensionless, >= 0)."""
    return (
        weights.ub_weight * counters.m_ub
        + weights.inter_pe_weight * counters.m_inter_pe
        + weights.aa_weight * counters.m_aa
        + weights.intra_pe_weight * counters.m_intra_pe
    )


def normalize_per_model(
    records: Sequence[tuple[K, object]],
) -> list[tuple[K, Fraction]]:
    """Divide each metric value by the minimum over the records.

    The best configuration maps to exactly 1.0, so normalized values from
    different models can be averaged with equal weight per model.
    """
    if not records:
        raise EmptyInput("normalize_per_model requires at least one record")
    values = [Fraction(value) for _, value in records]
    if any(value <= 0 for value in values):
        raise NonPositiveMetric("all metric values must be > 0")
    best = min(values)
    return [(key, value / best) for (key, _), value in zip(records, values)]
