"""Exception types shared across the toolkit."""


class AcsusyError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(AcsusyError):
    """Invalid run configuration (bad key, missing key, bad value)."""


class ThresholdViolation(AcsusyError):
    """Operation requested outside the unbroken-SUSY regime (beta*r0^2 >= -1)."""


class OverflowGuardError(AcsusyError):
    """Zero-mode exponent range exceeds the configured cap: the profile is
    too strong for the requested grid extent."""


class GridResolutionError(AcsusyError):
    """Grid too coarse to resolve the superpotential (|W| * h > 1)."""


class ScatteringContinuumError(AcsusyError):
    """No decaying outer solution exists at the requested energy (scattering
    continuum); inward integration is rejected."""


class SolverFailure(AcsusyError):
    """An ODE integration or eigensolver did not converge."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius
