"""Exception hierarchy shared across the package."""


class AsqpError(Exception):
    """Base class for all errors raised by asqp."""


class InvalidMatrix(AsqpError, ValueError):
    """A matrix argument contains non-finite entries or has a bad shape."""


class InvalidInput(AsqpError, ValueError):
    """Dimension mismatch between arguments."""


class NoActiveRows(AsqpError):
    """Multipliers were requested for an active matrix of rank zero."""


class NotPositiveDefinite(AsqpError, ValueError):
    """The quadratic term is not symmetric positive definite."""


class RankDeficientWorkingSet(AsqpError):
    """The stacked active matrix lost full row rank."""


class EmptyNullSpace(AsqpError):
    """The active matrix has a trivial null space, so no reduced variable exists."""


class InfeasibleStart(AsqpError, ValueError):
    """The starting point violates the constraints."""


class InvalidProblem(AsqpError, ValueError):
    """A problem failed structural validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid problem: {lines}")


class ProblemFormatError(AsqpError, ValueError):
    """A problem file could not be parsed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"field {field!r}: {message}")


class OracleInconclusive(AsqpError):
    """No enumerated active set produced a KKT point."""


class GeneratorSpecError(AsqpError, ValueError):
    """A generator specification cannot produce valid instances."""
