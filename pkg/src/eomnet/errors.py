"""Exception and warning types shared across the package."""

from __future__ import annotations


class InvalidSpecError(ValueError):
    """A system specification failed validation.

    ``violations`` holds every problem found, in deterministic order.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations) or "invalid spec"
        super().__init__(summary)


class ConfigError(ValueError):
    """Malformed JSON configuration (bad keys, bad types, bad syntax)."""


class TopologyError(ValueError):
    """The spec does not have the mode/coupling layout an operation requires."""


class UnstableSpecError(ArithmeticError):
    def __init__(self, margin: float):
        self.margin = margin
        super().__init__(f"coefficient matrix is not stable (min Re eigenvalue = {margin:.6g})")


class SingularMatrixError(ArithmeticError):
    """LU elimination hit a pivot below the singularity threshold.

    ``column`` is the elimination step where it happened; ``index`` is the
    frequency index when raised from a batched kernel.
    """

    def __init__(self, column: int, index: int | None = None):
        self.column = column
        self.index = index
        where = f" at frequency index {index}" if index is not None else ""
        super().__init__(f"matrix is singular to working precision (pivot column {column}){where}")


class ConvergenceError(ArithmeticError):
    def __init__(self, message: str, residuals=None):
        self.residuals = list(residuals) if residuals is not None else []
        super().__init__(message)


class RegimeWarning(UserWarning):
    """Parameters sit outside the regime where an approximation is trusted."""
