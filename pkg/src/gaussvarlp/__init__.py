"""Gaussian singular integrals on variable exponent Lebesgue spaces.

Numerical tools for the operators ``T_{F,m}`` (general) and ``Tbar_{F,m}``
(alternative) acting on ``L^{p(.)}(gamma_d)``, together with the exponent
regularity classes, Luxemburg norms and the kernel estimates used to study
their boundedness.
"""

from gaussvarlp.errors import (
    ConfigError,
    GaussVarLpError,
    NotInSpaceError,
    PreconditionError,
)

__version__ = "0.1.0"
SCHEMA = "gauss-varlp/1"

__all__ = [
    "ConfigError",
    "GaussVarLpError",
    "NotInSpaceError",
    "PreconditionError",
    "SCHEMA",
    "__version__",
]
