"""Weight-stationary systolic array emulator and design-space explorer."""

from .core import (
    ArrayConfig,
    EmulationReport,
    MovementCounters,
    TilePlan,
    emulate_gemm,
    emulate_network,
    plan_tiles,
)
from .energy import EnergyWeights, energy_cost, normalize_per_model
from .reference import reference_simulate
from .workloads import (
    GemmWorkload,
    LayerSpec,
    NetworkSpec,
    load_network,
    lower_layer,
    lower_network,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "EmulationReport",
    "EnergyWeights",
    "GemmWorkload",
    "LayerSpec",
    "MovementCounters",
    "NetworkSpec",
    "TilePlan",
    "emulate_gemm",
    "emulate_network",
    "energy_cost",
    "load_network",
    "lower_layer",
    "lower_network",
    "normalize_per_model",
    "plan_tiles",
    "reference_simulate",
]
