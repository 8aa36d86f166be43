"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter or configuration value."""


class GridMismatchError(ValueError):
    """Fields living on different grids were combined."""


class SpectralDomainError(ValueError):
    """Operator applied outside its domain (e.g. inverse power on a field with a mean)."""


class NumericalFailure(FloatingPointError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class NotSolenoidalError(ValueError):
    """A divergence-free field was required."""


class ResolutionExhausted(RuntimeError):
    """A series contains samples past the trustworthy resolution horizon."""


class NotConvergedError(RuntimeError):
    """Equilibrium extraction was requested for a run that did not converge."""


class CheckpointError(IOError):
    """Checkpoint file is corrupt, truncated or of an unsupported version."""
