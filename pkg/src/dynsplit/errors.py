"""Exception hierarchy shared by all modules."""


class DynsplitError(Exception):
    """Base class for every error raised by the package."""


class ContractError(DynsplitError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class UnsupportedDimensionError(ContractError):
    pass


class UnsupportedSchemeError(ContractError):
    pass


class ConfigurationError(DynsplitError, ValueError):
    """A problem or experiment setup is inconsistent."""


class FitError(DynsplitError, ArithmeticError):
    """Order fitting (or a norm ratio) is undefined for the given data."""


class DivisionDomainError(DynsplitError, ZeroDivisionError):
    """A relative quantity was requested against a zero reference."""
