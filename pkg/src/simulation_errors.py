#!/usr/bin/env python3
"""
Exception hierarchy for the multimode HOM simulator.

The CLI maps these classes onto exit codes, so every failure a user can
trigger through a config file should surface as one of them.
"""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class InvalidArgumentError(SimulationError, ValueError):
    """A size, physical quantity or specification is out of range."""


class GridMismatchError(InvalidArgumentError):
    """Two fields that must share a grid do not."""


class AsymmetricGridError(InvalidArgumentError):
    """The grid is not mirror-symmetric about y = 0."""


class NonFiniteSampleError(SimulationError, ArithmeticError):
    """A sampled value is NaN or infinite."""

    def __init__(self, i, j, x, y, value):
        self.i = i
        self.j = j
        self.x = x
        self.y = y
        self.value = value
        super().__init__(
            f"Non-finite sample {value!r} at node (i={i}, j={j}), x={x:.6g}, y={y:.6g}")


class ZeroFieldError(SimulationError, ArithmeticError):
    """The field has zero norm."""


class SpectralWindowError(SimulationError, ArithmeticError):
    """A transverse wavevector falls outside the sampled spectrum."""


class CoverageError(SimulationError, ArithmeticError):
    """Detection midpoints fall outside the sampled pump window."""


class ZeroBaselineError(SimulationError, ArithmeticError):
    """The coincidence baseline vanishes, so rates cannot be normalized."""


class InsufficientBaselineError(SimulationError, ArithmeticError):
    """A curve lacks the samples needed to compute a visibility."""


class ResourceLimitError(SimulationError, MemoryError):
    """A brute-force computation would exceed its size cap."""
