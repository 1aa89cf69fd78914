"""Exception types shared across the package."""

from __future__ import annotations


class Mhd1dError(Exception):
    """Base class for all package-specific errors."""


class DataValidationError(Mhd1dError):
    """Initial data violates an admissibility requirement."""


class ConfigError(Mhd1dError):
    """Bad run configuration; message carries the offending key path."""


class NormSpecError(Mhd1dError):
    """Inadmissible (q, r) exponent pair; message names the violated inequality."""


class PositivityError(Mhd1dError):
    """Specific volume or temperature went nonpositive during a step.

    Carries the offending cell index and a suggested smaller time step.
    """

    def __init__(self, message: str, cell_index: int, suggested_dt: float, t: float | None = None):
        super().__init__(message)
        self.cell_index = cell_index
        self.suggested_dt = suggested_dt
        self.t = t


class NewtonError(Mhd1dError):
    """Implicit heat solve failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float, iterations: int, t: float | None = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.t = t
