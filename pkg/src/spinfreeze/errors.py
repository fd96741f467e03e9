"""Exception hierarchy shared by the library and the command line."""


class SpinFreezeError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinFreezeError, ValueError):
    """Input violates a structural or semantic contract (CLI exit code 1)."""


class ParseError(ValidationError):
    """A document could not be parsed.

    ``locus`` names where the problem was found, e.g. ``"line 4"`` or
    ``"edges[2]"``.
    """

    def __init__(self, message: str, locus: str | None = None):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class NumericalError(SpinFreezeError, ArithmeticError):
    """A numerical contract was violated (CLI exit code 2)."""

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")


class BudgetError(ValidationError):
    """A request exceeds a hard resource cap."""
