"""Shared exception types."""


class DomainValidationError(ValueError):
    """Bad user input: malformed domain data, out-of-range parameters, invalid configuration."""


class NumericalError(RuntimeError):
    """A computation could not be completed reliably: non-convergence, degenerate systems."""
