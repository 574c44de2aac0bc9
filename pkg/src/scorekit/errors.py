"""Exception and warning types shared across the package."""


class ScorekitError(Exception):
    """Base class for all package errors."""


class DomainError(ScorekitError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConfigError(ScorekitError, ValueError):
    """A rule, family, curve or run configuration is invalid."""


class NumericError(ScorekitError, RuntimeError):
    """An iterative numerical procedure failed to produce a usable result."""


class ConfigWarning(UserWarning):
    """A configuration is accepted but likely not what the caller meant."""
