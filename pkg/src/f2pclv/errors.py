"""Exception types shared across the toolkit.

The CLI maps DataError to exit code 2 and NumericalError to exit code 3.
"""


class DataError(ValueError):
    """Malformed, inconsistent, or non-identifiable input data."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a finite, converged result."""
