"""Exception types raised by the library."""


class GaussVarLpError(Exception):
    """Base class for all library errors."""


class PreconditionError(GaussVarLpError, ValueError):
    """An operation was called outside its documented domain."""


class NotInSpaceError(GaussVarLpError):
    """The modular of ``f / lambda`` is infinite for every admissible ``lambda``."""


class ConfigError(GaussVarLpError, ValueError):
    """A configuration entry failed validation.

    Parameters
    ----------
    field : str
        Dotted path of the offending entry, e.g. ``"exponent.p_inf"``.
    message : str
        Human readable reason.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
