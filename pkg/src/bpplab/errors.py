"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the set where the operation is defined."""


class DivergenceError(ArithmeticError):
    """A quadrature or iteration failed to converge."""


class NotFoundError(LookupError):
    """A search over a finite grid produced no admissible value."""


class DerivativeUnavailableError(ValueError):
    """A field was used where second derivatives are required but has none."""


class DegenerateSceneError(ValueError):
    """The test set leaves no room for a candidate ball."""


class SolverError(RuntimeError):
    """A linear solve did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CaseMismatchError(AssertionError):
    """A counter-example check disagreed with its expected outcome."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NestingError(ArithmeticError):
    """A ball chain failed its nesting inclusion."""
