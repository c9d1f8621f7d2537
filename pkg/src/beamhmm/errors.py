"""Exception types shared across the package."""


class BeamHMMError(Exception):
    """Base class for all package errors."""


class ParameterError(BeamHMMError, ValueError):
    """Invalid argument (non-positive rate, dimension mismatch, ...)."""


class DegenerateInputError(BeamHMMError):
    """Input cannot support the requested operation (e.g. K > distinct points)."""


class DegenerateFitError(BeamHMMError):
    """Model fit collapsed (singular covariance despite regularization)."""


class TruncationError(BeamHMMError):
    """Adaptive truncation exceeded the configured state cap."""


class CalibrationError(BeamHMMError):
    """Overlap calibration failed to bracket the target."""


class NumericalError(BeamHMMError):
    """Non-finite quantity appeared during sampling."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class UndefinedStatisticError(BeamHMMError):
    """Diagnostic statistic is undefined for this input (e.g. zero variance)."""
