"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: validation problems exit 1,
numerical failures exit 2, resource-budget violations exit 3.
"""


class ValidationError(ValueError):
    """Invalid parameters, dimensions, or configuration."""


class DimensionError(ValidationError):
    """Array shapes or mode/atom counts are inconsistent."""


class ConfigError(ValidationError):
    """Malformed, incomplete, or over-specified experiment configuration."""


class NoDarkStateError(ValidationError):
    """A driven collective cavity mode has no atomic partner to cancel it."""


class ThresholdError(ValidationError):
    """Drive at or above the collective instability threshold 4*eta/(N*g) = 1."""


class NumericalError(RuntimeError):
    """A solve failed or its residual exceeded tolerance."""

    def __init__(self, message, *, condition=None, residual=None):
        super().__init__(message)
        self.condition = condition
        self.residual = residual


class DegenerateSteadyStateError(NumericalError):
    """The Liouvillian kernel contains more than one stationary state."""


class ResourceLimitError(RuntimeError):
    """A requested solve exceeds the configured dense-dimension budget."""
