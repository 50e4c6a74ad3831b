"""Exception hierarchy shared across the package.

Input/validation problems derive from :class:`InputError` (CLI exit code 1),
emulation-time failures from :class:`EmulationError` (CLI exit code 2).
"""


class SysolveError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SysolveError, ValueError):
    """Invalid user input: bad specs, malformed files, bad flag values."""


class EmulationError(SysolveError):
    """Failure while executing an otherwise well-formed emulation."""


class InvalidLayer(InputError):
    """A layer description violates its invariants."""


class DegenerateOutput(InvalidLayer):
    """Computed output spatial size would be smaller than 1x1."""


class InvalidNetwork(InputError):
    """A network description violates its invariants."""


class ShapeMismatch(EmulationError):
    """Supplied operand matrices do not match the workload dimensions."""


class BitwidthOverflow(EmulationError):
    """A value cannot be represented in the configured bit width."""


class EmptyInput(InputError):
    """An operation received an empty collection where data is required."""


class NonPositiveMetric(InputError):
    """Normalization requires strictly positive metric values."""


class MissingDesignPoint(InputError):
    """Design-point coverage across models is ragged or duplicated."""


class DuplicatePoint(MissingDesignPoint):
    """The same design point appears more than once for one model."""


class NonSquareDecomposition(InputError):
    """A PE-count/aspect-ratio pair does not yield integer dimensions."""


class UnknownObjective(InputError):
    """An objective name does not map to a known sweep metric."""


class NonFiniteObjective(InputError):
    """Pareto objectives must be finite numbers."""


class RaggedGrid(InputError):
    """A heatmap requires full rectangular grid coverage."""
