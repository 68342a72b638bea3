"""Shared exception types."""


class ValidationError(ValueError):
    """A problem specification violates one of the model's standing assumptions."""


class SolverError(RuntimeError):
    """A numerical run went unstable or produced an invalid state."""
