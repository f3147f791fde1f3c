"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class ConsistencyError(RuntimeError):
    """An internal numerical identity failed beyond its tolerance."""
