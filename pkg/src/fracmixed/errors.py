"""Exception types shared across the package."""


class FracmixedError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(FracmixedError):
    """Invalid or unknown configuration input."""


class PureNeumannError(FracmixedError):
    """The coercive solver was asked for an unsupported pure-Neumann setup."""


class ConvergenceError(FracmixedError):
    """An iterative method failed to reach its tolerance."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class CapViolationError(FracmixedError):
    """A monotone iterate escaped its supersolution cap (discretization artifact)."""


class BracketInconsistencyError(FracmixedError):
    """A bisection probe succeeded above a failure; tolerance interplay."""
