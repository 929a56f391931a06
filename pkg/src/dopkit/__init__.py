"""Discrete orthogonal polynomials with varying weights.

Extended-precision bases and constrained equilibrium measures form the core;
the determinantal ensembles, hexagon tilings and asymptotic checks build on them.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigurationError,
    DopkitError,
    NumericError,
    PoleError,
    PrecisionError,
    PreconditionError,
)

__all__ = [
    "__version__", "DopkitError", "ConfigurationError", "NumericError", "PrecisionError",
    "PoleError", "PreconditionError",
]
