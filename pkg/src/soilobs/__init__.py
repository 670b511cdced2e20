"""State estimation for nitrate transport and reaction in soil."""

from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    NumericalError,
    SingularityError,
    SoilObsError,
    SynthesisError,
)

__version__ = "0.1.0"
