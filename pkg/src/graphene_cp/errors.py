"""Exception types raised by graphene_cp."""


class GrapheneCPError(Exception):
    """Base class for all package errors."""


class DomainError(GrapheneCPError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(GrapheneCPError, ValueError):
    pass


class UnsupportedStateError(GrapheneCPError, ValueError):
    pass


class SelectionRuleError(GrapheneCPError, ValueError):
    pass


class LineDataError(GrapheneCPError, ValueError):
    """Malformed row in an atomic line-data file."""

    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class IndeterminateError(GrapheneCPError, ValueError):
    pass


class BranchError(GrapheneCPError, ValueError):
    """Arguments leave the real evanescent branch of the continued coefficients."""


class NumericalError(GrapheneCPError, ArithmeticError):
    """A numerical procedure failed; ``diagnostics`` carries whatever is known."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IntegrationError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass
