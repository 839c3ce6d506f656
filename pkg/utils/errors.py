"""
Exception hierarchy shared by every package.

Problems with user input or configuration also derive from ``ValueError`` so
callers that only know about bad data can keep catching that.
"""
from typing import Optional


class SparsePickError(Exception):
    """Base class for all errors raised by this project."""


class SpectraFormatError(SparsePickError, ValueError):
    """Spectra file is structurally wrong (ragged rows, bad orientation)."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class SpectraParseError(SparsePickError, ValueError):
    """A cell could not be parsed as a real number."""

    def __init__(self, message: str, row: int, column: int):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(SparsePickError, ValueError):
    """Input holds no data."""


class DimensionMismatchError(SparsePickError, ValueError):
    """Matrix shapes do not agree."""


class InvalidParameterError(SparsePickError, ValueError):
    """A parameter is outside its admissible range."""


class DegenerateInputError(SparsePickError, ValueError):
    """Input is valid in shape but cannot be processed (e.g. a zero vector)."""


class SimulationConfigError(SparsePickError, ValueError):
    """Simulation settings are inconsistent."""


class ConfigError(SparsePickError, ValueError):
    """Configuration file or command-line values are invalid."""


class NoActiveAtomsError(SparsePickError):
    """Sparse coding produced no active basis vector; alpha is too large."""


class FitDivergedError(SparsePickError):
    """Dictionary learning produced a non-finite objective."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration
