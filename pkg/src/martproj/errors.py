"""Exception types shared across the toolkit."""


class MartprojError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(MartprojError, ValueError):
    """Invalid or mismatched vector/matrix dimensions."""


class DegenerateDirectionError(MartprojError, ValueError):
    """Direction proportional to the all-ones vector; centered projection undefined."""


class NonStationaryModelError(MartprojError, ValueError):
    """ARCH coefficients sum to >= 1; no stationary solution exists."""


class UnsupportedMethodError(MartprojError, ValueError):
    """Requested computation method not available for this model."""


class InsufficientTableError(MartprojError, ValueError):
    """Moment table horizon too short for the requested dimension."""


class InvalidSampleError(MartprojError, ValueError):
    """Empty sample or sample containing non-finite values."""


class UnsupportedCfError(MartprojError, ValueError):
    """Innovation law has no closed-form characteristic function."""


class AccuracyError(MartprojError, RuntimeError):
    """Quadrature failed to reach the requested accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResourceLimitError(MartprojError, RuntimeError):
    """Requested computation exceeds the configured memory budget."""


class NumericFailureError(MartprojError, RuntimeError):
    """Linear algebra failure (singular or ill-conditioned system)."""


class ConfigError(MartprojError, ValueError):
    """Invalid run configuration (bad flag, unknown key, out-of-range value)."""
