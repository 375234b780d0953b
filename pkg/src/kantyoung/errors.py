"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(ValueError):
    """Arguments are well-formed numbers but inconsistent with each other."""


class HypothesisError(ValueError):
    """A matrix pair violates the spectral ordering M(A) <= m(B)."""


class NumericError(ArithmeticError):
    """An iterative kernel failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
