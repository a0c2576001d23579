"""Exception hierarchy shared by all modules."""


class VolterraError(Exception):
    """Base class for every error raised by this package."""


class DomainError(VolterraError, ValueError):
    """An argument lies outside the interval an operation is defined on."""


class ConfigError(VolterraError, ValueError):
    """Invalid configuration value. ``field`` names the offending entry when known."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class IntegrandError(VolterraError, ArithmeticError):
    """The integrand returned a NaN or infinite sample."""


class AssemblyError(VolterraError):
    """A coefficient integral could not be computed to tolerance."""

    def __init__(self, message, index=None, node=None):
        super().__init__(message)
        self.index = index
        self.node = node


class NumericalError(VolterraError, ArithmeticError):
    """Linear algebra failure, e.g. non-finite matrix entries."""
