"""Exception types shared across the package."""


class InvalidDimensionsError(ValueError):
    """Channel or beam dimensions are inconsistent or out of range."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a formula."""


class EmptyInputError(ValueError):
    """An operation received an empty collection."""


class RegimeError(ValueError):
    """Arguments violate the SNR-regime guard of an asymptotic formula."""


class InfeasibleTargetError(ValueError):
    """No threshold achieves the requested expected feedback load."""


class SingularityError(ValueError):
    """Effective channel too ill-conditioned for zero-forcing."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed to converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigError(ValueError):
    """Experiment configuration is malformed or internally inconsistent."""
