class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


class CapacityError(RuntimeError):
    """A problem instance is too large for the exact oracle."""


class InvariantViolation(AssertionError):
    """A runtime invariant of a simulation failed."""
