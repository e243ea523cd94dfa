"""Shared exception types."""


class InvalidInputError(ValueError):
    """An input violates a documented precondition."""


class SolverError(RuntimeError):
    """An exact solver failed to terminate; carries the offending instance."""

    def __init__(self, message: str, instance: dict | None = None):
        super().__init__(message)
        self.instance = instance or {}


class ConvergenceError(SolverError):
    """An iterative solver stopped without reaching its tolerance."""

    def __init__(self, message: str, mismatch: float, instance: dict | None = None):
        super().__init__(message, instance)
        self.mismatch = mismatch
