"""Exception types shared across the package."""


class MigsimError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(MigsimError, ValueError):
    """A physical parameter is outside its admissible range."""


class UnitTagError(MigsimError, ValueError):
    """Unknown or missing unit tag on a physical quantity."""


class InvalidGeometryError(MigsimError, ValueError):
    """Geometry request violates layout constraints."""


class SingularGeometryError(MigsimError, ValueError):
    """Two atoms coincide, making an interaction term singular."""


class CalibrationError(MigsimError, RuntimeError):
    """Group-velocity calibration could not bracket a solution."""


class InvalidInstructionError(MigsimError, ValueError):
    """A switching instruction is malformed or impossible at its site."""


class IntegrationFailureError(MigsimError, RuntimeError):
    """A density-matrix invariant was breached during time integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class DimensionCapError(MigsimError, ValueError):
    """Requested full-model Hilbert space exceeds the configured cap."""


class EnsembleError(MigsimError, RuntimeError):
    """Too many realizations failed for the ensemble to be trusted."""


class ConfigError(MigsimError, ValueError):
    """Scenario configuration file is malformed or inconsistent."""
