"""Exception hierarchy shared across the package."""


class BagcvError(Exception):
    """Base class for all package errors."""


class ConfigError(BagcvError, ValueError):
    """Invalid configuration value (unknown preset, bad flag combination)."""


class DomainError(BagcvError, ValueError):
    """Argument outside an operation's domain (h <= 0, m > n, ...)."""


class NumericalError(BagcvError, ArithmeticError):
    """A numerical procedure failed (non-finite criterion, bracket failure)."""


class FitError(BagcvError, RuntimeError):
    """All candidate mixture fits degenerated."""


class DataError(BagcvError, ValueError):
    """Input data could not be parsed or is too small."""
