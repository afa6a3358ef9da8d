"""Exception hierarchy.  The CLI maps each family onto an exit code."""


class CuspworkError(Exception):
    exit_code = 1


class InputError(CuspworkError, ValueError):
    """Malformed input: unknown vertex, bad JSON, invalid word."""

    exit_code = 2


class DomainError(CuspworkError, ValueError):
    """Well-formed input outside an operation's domain (e.g. disconnected pair)."""

    exit_code = 2


class PresentationError(InputError):
    """Presentation whose word problem this package will not decide."""


class ModelingError(InputError):
    pass


class PropertyViolation(CuspworkError):
    """An exact identity failed.  ``witness`` carries the offending data."""

    exit_code = 1

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(CuspworkError):
    exit_code = 3

    def __init__(self, message, completed=None):
        super().__init__(message)
        self.completed = completed if completed is not None else []


class BallMarginError(BudgetExceeded):
    """A computation touched the boundary of the finite ball."""

    def __init__(self, message, required_margin=None):
        super().__init__(message)
        self.required_margin = required_margin
