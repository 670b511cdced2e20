"""Exception hierarchy shared by all stages."""


class SoilObsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SoilObsError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(DomainError, ArithmeticError):
    """A Monod denominator vanishes."""


class NumericalError(SoilObsError, ArithmeticError):
    """A dense linear-algebra kernel failed or lost all accuracy."""


class SynthesisError(SoilObsError):
    """No certified observer gain was found.

    ``diagnostic`` carries whatever the failing stage knew (worst residual
    eigenvalue, rank defect, conditioning) so callers can report it.
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = dict(diagnostic or {})


class DivergenceError(SoilObsError):
    """The integrator met a non-finite state."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class ConfigError(SoilObsError):
    """A scenario file is unreadable or fails validation."""
