"""Exception types shared across the toolkit."""


class TomouqError(Exception):
    """Base class for all toolkit errors."""


class GeometryError(TomouqError, ValueError):
    """Invalid imaging geometry (bad counts, image larger than the padded frame, ...)."""


class ShapeError(TomouqError, ValueError):
    """Array dimensions do not match the operator or each other."""


class DegenerateInputError(TomouqError, ValueError):
    """Input carries no usable signal (e.g. an all-zero sinogram for noise scaling)."""


class NumericError(TomouqError, ArithmeticError):
    """A computation produced non-finite values."""


class TrainingDivergedError(NumericError):
    """Optimization produced a non-finite loss.

    ``last_state`` carries the most recent finite model / parameter state so a
    caller can inspect or checkpoint it.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ConfigError(TomouqError, ValueError):
    """Experiment configuration failed validation.

    ``field`` names the offending entry (dotted path) when known.
    """

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class FormatError(TomouqError, ValueError):
    """A file is not in a supported format (non-grayscale image, bad magic, ...)."""


class SamplerError(TomouqError, RuntimeError):
    """An MCMC chain failed diagnostics (e.g. no accepted proposals during burn-in)."""
