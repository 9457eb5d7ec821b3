"""Exception types raised across the package."""


class RandcorrError(ValueError):
    """Base class for input errors detected before any heavy computation."""


class ValidationError(RandcorrError):
    """A state, setting or file failed validation."""


class DomainError(RandcorrError):
    """A numeric argument lies outside the domain of an operation."""


class DimensionError(RandcorrError):
    """Local dimensions or party counts do not match."""
